use hic_core::circuit::generators::{gen_ising_1d, gen_qaoa_mirrored, path_edges};
use hic_core::circuit::qasm::parse_qasm;
use hic_core::circuit::Observable;
use hic_core::cut::CutAction;
use hic_core::hardware::CalibrationSnapshot;
use hic_core::select::{compare_with_baseline, select};
use hic_core::sim::exact_expectation;

const FALCON: &str = include_str!("../fixtures/falcon27.json");
const ISLANDS: &str = include_str!("../fixtures/heavy_hex_islands.json");
const LINE9: &str = include_str!("../fixtures/line9_islands.json");
const QAOA12: &str = include_str!("../fixtures/qaoa12_mirrored.qasm");

#[test]
fn falcon_sample_shape() {
    let s = CalibrationSnapshot::from_json(FALCON).unwrap();
    assert_eq!(s.num_qubits(), 27);
    assert_eq!(s.coupling.edges.len(), 28);
}

#[test]
fn qaoa_fixture_matches_generator() {
    let c = parse_qasm(QAOA12).unwrap();
    let g = gen_qaoa_mirrored(12, &path_edges(12), &[0.4], &[0.3]).unwrap();
    assert_eq!(c.gates(), g.gates());
    assert!((exact_expectation(&c, &Observable::mean_z(12)).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn ising_on_two_islands_takes_the_wire_cut() {
    let snap = CalibrationSnapshot::from_json(LINE9).unwrap();
    let c = gen_ising_1d(6, 2, 0.3, 0.2).unwrap();
    let r = select(&c, &snap, 2.0, 2.0, 4).unwrap();
    assert_eq!(r.punctured.component_sizes(), vec![4, 4]);
    let w = r.winner.unwrap();
    let s = w.strategy.unwrap();
    assert_eq!(w.d, 4);
    assert_eq!((s.num_gate_cuts, s.num_wire_cuts, s.canonical_executions()), (2, 1, 1296));
    assert!(s.actions.iter().any(|a| matches!(a, CutAction::WireCut { .. })));
}

#[test]
fn budget_of_one_has_no_winner() {
    let snap = CalibrationSnapshot::from_json(LINE9).unwrap();
    let c = gen_ising_1d(6, 2, 0.3, 0.2).unwrap();
    let r = select(&c, &snap, 2.0, 2.0, 1).unwrap();
    assert!(r.winner.is_none());
}

#[test]
fn qaoa_islands_cut_cheaper_than_equal_partition() {
    let snap = CalibrationSnapshot::from_json(ISLANDS).unwrap();
    let c = parse_qasm(QAOA12).unwrap();
    let (sel, cmp) = compare_with_baseline(&c, &snap, 1.0, 3.0, 4).unwrap();
    let cmp = cmp.unwrap();
    assert!(cmp.winner_executions <= cmp.baseline_executions);
    assert!(cmp.execution_ratio >= 4.0);
    let best = sel.winner.unwrap().w_s.unwrap();
    assert!(sel.all_candidates.iter().filter(|e| e.feasible).all(|e| best <= e.w_s.unwrap()));
}
