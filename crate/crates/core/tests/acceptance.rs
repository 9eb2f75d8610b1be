//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use hic_core::circuit::generators::{
    gen_ising_1d, gen_qaoa, gen_qaoa_mirrored, gen_random_clifford, path_edges, ring_edges,
};
use hic_core::circuit::qasm::parse_qasm;
use hic_core::circuit::{Circuit, Gate, Observable, Pauli, PauliString};
use hic_core::cut::{find_cuts, oracle_min_cuts, OracleConfig};
use hic_core::experiments::{fig5_correlation, mirrored_fidelity, table1_circuit, CorrelationConfig};
use hic_core::hardware::topology::{coupling_for, gen_topology, NoiseLaw, TopologyKind};
use hic_core::hardware::{CalibrationSnapshot, NoiseProfile};
use hic_core::layout::{weighted_score, Layout};
use hic_core::puncture::{candidate_constraints, puncture, zscore_outliers};
use hic_core::qpd::{execute_exact, generate_subexperiments, reconstruct};
use hic_core::select::{compare_with_baseline, select, SelectionResult};
use hic_core::sim::{exact_expectation, noisy_expectation, NoisyConfig};
use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const QPD_TOL: f64 = 1e-9;
const CHANNEL_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;
const TABLE4_TOL: f64 = 5e-4;
const MIN_RATIO: f64 = 4.0;
const SHOTS: u64 = 4096;

const ISLANDS: &str = include_str!("../fixtures/heavy_hex_islands.json");
const QAOA12: &str = include_str!("../fixtures/qaoa12_mirrored.qasm");
const FALCON: &str = include_str!("../fixtures/falcon27.json");

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn table_one() -> Check {
    let c = table1_circuit();
    let cfg = OracleConfig::default();
    let mut out = Vec::new();
    for (d, g, w, ex) in [(3, 4, 0, 6561u128), (4, 2, 1, 1296), (5, 2, 1, 1296), (2, 8, 0, 43_046_721)] {
        let o = oracle_min_cuts(&c, d, 8, &cfg).map_err(|e| e.to_string())?.ok_or(format!("oracle: none at d={d}"))?;
        let got = (o.num_gate_cuts, o.num_wire_cuts, o.canonical_executions());
        ensure(got == (g, w, ex), || format!("oracle d={d}: {got:?}"))?;
        ensure(9u128.pow(g as u32) * 16u128.pow(w as u32) == ex, || format!("d={d}: formula"))?;
        let s = find_cuts(&c, d, 8).ok_or(format!("search: none at d={d}"))?;
        if d == 3 || d == 4 {
            ensure(s.canonical_executions() == ex, || format!("search d={d}: {}", s.canonical_executions()))?;
        }
        out.push(format!("d={d}:{g}G+{w}W={ex}"));
    }
    Ok(out.join(" "))
}

fn qpd_fixture() -> Vec<Circuit> {
    let mut v = Vec::new();
    for n in 4..=10 {
        v.push(gen_ising_1d(n, 2, 0.37, 0.21).unwrap());
        v.push(gen_qaoa_mirrored(n, &path_edges(n), &[0.45], &[0.3]).unwrap());
        v.push(gen_random_clifford(n, 2, n as u64).unwrap());
    }
    for n in [4, 6, 8] {
        v.push(gen_ising_1d(n, 3, 0.6, 0.45).unwrap());
        v.push(gen_qaoa_mirrored(n, &ring_edges(n), &[0.7], &[0.2]).unwrap());
        v.push(gen_random_clifford(n, 3, 100 + n as u64).unwrap());
    }
    v
}

fn qpd_exactness() -> Check {
    let circuits = qpd_fixture();
    ensure(circuits.len() == 30, || format!("{} circuits", circuits.len()))?;
    let (mut strategies, mut worst) = (0, 0.0f64);
    for c in &circuits {
        let n = c.num_qubits();
        let obs = Observable::new(vec![
            (0.5, PauliString::z(0)),
            (0.25, PauliString::zz(1, n - 1)),
            (0.75, PauliString([(0, Pauli::X), (n / 2, Pauli::Y)].into_iter().collect())),
        ]);
        let want = exact_expectation(c, &obs).map_err(|e| e.to_string())?;
        for d in 2..n {
            let Some(s) = find_cuts(c, d, 3) else { continue };
            let set = generate_subexperiments(&s, &obs).map_err(|e| e.to_string())?;
            let res = execute_exact(&set).map_err(|e| e.to_string())?;
            let got = reconstruct(&set, &res, 0).map_err(|e| e.to_string())?.expectation;
            let err = (got - want).abs();
            worst = worst.max(err);
            ensure(err < QPD_TOL, || format!("{} d={d}: {got} vs {want}", c.name()))?;
            strategies += 1;
        }
    }
    ensure(strategies > 0, || "no strategies".into())?;
    Ok(format!("{} circuits, {strategies} strategies, max error {worst:.1e}", circuits.len()))
}

fn channels() -> Check {
    let mut out = Vec::new();
    for (name, (dev, norm), want) in [
        ("CZ", common::gate_cut_deviation(&Gate::cz(0, 1)), 3.0),
        ("CX", common::gate_cut_deviation(&Gate::cx(0, 1)), 3.0),
        ("wire", common::wire_cut_deviation(), 4.0),
    ] {
        ensure(dev < CHANNEL_TOL, || format!("{name}: deviation {dev:e}"))?;
        ensure((norm - want).abs() < NORM_TOL, || format!("{name}: 1-norm {norm}"))?;
        out.push(format!("{name} dev={dev:.1e} norm={norm}"));
    }
    Ok(out.join(", "))
}

fn table_four() -> Check {
    let a = weighted_score(&[(1, 0.4221), (1, 0.5186), (1, 0.4221)], 3).map_err(|e| e.to_string())?;
    let b = weighted_score(&[(1, 0.4217), (2, 0.4353)], 3).map_err(|e| e.to_string())?;
    ensure((a - 0.4542).abs() < TABLE4_TOL && (b - 0.4308).abs() < TABLE4_TOL, || format!("{a} {b}"))?;
    Ok(format!("{a:.4} {b:.4}"))
}

fn overhead_reduction() -> Check {
    let snap = CalibrationSnapshot::from_json(ISLANDS).map_err(|e| e.to_string())?;
    let c = parse_qasm(QAOA12).map_err(|e| e.to_string())?;
    let (sel, cmp) = compare_with_baseline(&c, &snap, 1.0, 3.0, 4).map_err(|e| e.to_string())?;
    let cmp = cmp.ok_or("no comparison")?;
    let best = sel.winner.as_ref().and_then(|w| w.w_s).ok_or("no winner")?;
    for e in sel.all_candidates.iter().filter(|e| e.feasible) {
        ensure(best <= e.w_s.unwrap(), || format!("d={} beats the winner", e.d))?;
    }
    ensure(cmp.winner_executions <= cmp.baseline_executions, || format!("{cmp:?}"))?;
    ensure(cmp.execution_ratio >= MIN_RATIO, || format!("ratio {}", cmp.execution_ratio))?;
    Ok(format!(
        "d={} ({} exec, W_s {:.3}) vs baseline d={} ({} exec), ratio {:.1}x",
        cmp.winner_d,
        cmp.winner_executions,
        cmp.winner_w_s,
        cmp.baseline_d,
        cmp.baseline_executions,
        cmp.execution_ratio
    ))
}

fn random_kind(rng: &mut ChaCha8Rng) -> TopologyKind {
    match rng.gen_range(0..3) {
        0 => TopologyKind::Line(rng.gen_range(2..20)),
        1 => TopologyKind::Grid { rows: rng.gen_range(2..5), cols: rng.gen_range(2..6) },
        _ => TopologyKind::HeavyHex(rng.gen_range(1..3)),
    }
}

fn puncturing() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..100 {
        let law = NoiseLaw {
            spread: rng.gen_range(0.0..0.6),
            outlier_fraction: rng.gen_range(0.0..0.3),
            outlier_multiplier: rng.gen_range(2.0..10.0),
            ..NoiseLaw::default()
        };
        let kind = random_kind(&mut rng);
        let snap = gen_topology(kind, rng.gen(), &law).map_err(|e| e.to_string())?;
        let z1 = rng.gen_range(0.3..3.0);
        let z2 = z1 + rng.gen_range(0.0..2.0);
        let fail = |what: &str| format!("case {case} ({kind:?}): {what}");

        let qv: BTreeMap<usize, f64> = (0..snap.num_qubits()).map(|q| (q, snap.noise.qubit_error(q))).collect();
        ensure(zscore_outliers(&qv, z2).is_subset(&zscore_outliers(&qv, z1)), || fail("qubit outliers"))?;
        let ce = &snap.noise.cx_error;
        ensure(zscore_outliers(ce, z2).is_subset(&zscore_outliers(ce, z1)), || fail("edge outliers"))?;

        for z in [z1, z2] {
            let p = puncture(&snap, z, z).map_err(|e| e.to_string())?;
            for &(u, v) in &p.retained_edges {
                ensure(p.retained_qubits.contains(&u) && p.retained_qubits.contains(&v), || fail("dangling edge"))?;
            }
            for &q in &p.retained_qubits {
                ensure(p.retained_edges.iter().any(|&(u, v)| u == q || v == q), || fail("isolated qubit"))?;
            }
            let mut uf = UnionFind::<usize>::new(snap.num_qubits());
            for &(u, v) in &p.retained_edges {
                uf.union(u, v);
            }
            let mut groups: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
            for &q in &p.retained_qubits {
                groups.entry(uf.find(q)).or_default().insert(q);
            }
            let want: BTreeSet<BTreeSet<usize>> = groups.into_values().collect();
            let got: BTreeSet<BTreeSet<usize>> = p.components.iter().map(|c| c.qubits.clone()).collect();
            ensure(got == want, || fail("components differ from union-find"))?;
        }

        let map = coupling_for(kind).map_err(|e| e.to_string())?;
        let flat = NoiseProfile::uniform(&map, 0.02, 3e-4, 0.01);
        let flat = CalibrationSnapshot::new(map, flat, "flat").map_err(|e| e.to_string())?;
        let p = puncture(&flat, z1, z1).map_err(|e| e.to_string())?;
        ensure(p.removed_qubits.is_empty() && p.removed_edges.is_empty(), || fail("uniform noise removed something"))?;
    }
    Ok("100 snapshots".into())
}

fn random_pair(rng: &mut ChaCha8Rng) -> (Circuit, CalibrationSnapshot) {
    let n = rng.gen_range(4..8);
    let c = if rng.gen_bool(0.5) {
        gen_random_clifford(n, rng.gen_range(1..4), rng.gen()).unwrap()
    } else {
        gen_qaoa(n, &ring_edges(n), &[rng.gen_range(0.1..1.5)], &[0.4]).unwrap()
    };
    let kind = match rng.gen_range(0..3) {
        0 => TopologyKind::Line(rng.gen_range(4..12)),
        1 => TopologyKind::Grid { rows: rng.gen_range(2..4), cols: rng.gen_range(2..4) },
        _ => TopologyKind::HeavyHex(1),
    };
    let law = NoiseLaw { outlier_fraction: 0.2, ..NoiseLaw::default() };
    (c, gen_topology(kind, rng.gen(), &law).unwrap())
}

fn in_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().unwrap().install(f)
}

fn winner_ws(r: &SelectionResult) -> Option<f64> {
    r.winner.as_ref().and_then(|w| w.w_s)
}

fn selection() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut winners, mut pairs) = (0, 0);
    while pairs < 25 {
        let (c, snap) = random_pair(&mut rng);
        let k = rng.gen_range(1..4);
        let Ok(r) = select(&c, &snap, 1.5, 1.5, k) else { continue };
        pairs += 1;
        let fail = |what: &str| format!("pair {pairs} ({}, k={k}): {what}", c.name());

        let ds: Vec<usize> = r.all_candidates.iter().map(|e| e.d).collect();
        ensure(Ok(ds) == candidate_constraints(&r.punctured), || fail("sweep incomplete"))?;

        match winner_ws(&r) {
            Some(ws) => {
                winners += 1;
                for e in r.all_candidates.iter().filter(|e| e.feasible) {
                    ensure(ws <= e.w_s.unwrap(), || fail("winner not optimal"))?;
                }
                ensure(r.winner.as_ref().unwrap().num_cuts().unwrap() <= k, || fail("winner over budget"))?;
            }
            None => ensure(r.all_candidates.iter().all(|e| !e.feasible), || fail("feasible candidate dropped"))?,
        }

        let wider = select(&c, &snap, 1.5, 1.5, k + 2).map_err(|e| e.to_string())?;
        for (a, b) in r.all_candidates.iter().zip(&wider.all_candidates) {
            ensure(!a.feasible || b.feasible, || fail("feasibility lost under a larger budget"))?;
        }
        if let (Some(x), Some(y)) = (winner_ws(&r), winner_ws(&wider)) {
            ensure(y <= x, || fail("larger budget scored worse"))?;
        }

        for jobs in [1, 4, 8] {
            let again = in_pool(jobs, || select(&c, &snap, 1.5, 1.5, k).unwrap());
            ensure(again == r, || fail(&format!("differs with {jobs} workers")))?;
        }
    }
    Ok(format!("{pairs} pairs, {winners} with a winner"))
}

fn correlation() -> Check {
    let rows = fig5_correlation(&CorrelationConfig::default()).map_err(|e| e.to_string())?;
    ensure(rows.len() == 20, || format!("{} coefficients", rows.len()))?;
    for r in &rows {
        ensure((-1.0..=1.0).contains(&r.pearson_r), || format!("{}: r={}", r.circuit, r.pearson_r))?;
    }
    let high = rows.iter().filter(|r| r.pearson_r > 0.9).count();
    let min = rows.iter().map(|r| r.pearson_r).fold(f64::INFINITY, f64::min);
    Ok(format!("20 coefficients in [-1,1], {high}/20 above 0.9, min {min:.3}"))
}

fn noisy_sanity() -> Check {
    let snap = CalibrationSnapshot::from_json(FALCON).map_err(|e| e.to_string())?;
    let c = gen_qaoa_mirrored(8, &ring_edges(8), &[0.4], &[0.3]).unwrap();
    let cfg = NoisyConfig { shots: SHOTS, seed: 0, readout_flips: true, jobs: 0 };
    let table = mirrored_fidelity(&c, &snap, &[0.5, 1.0, 2.0], &[1, 2, 3], &cfg).map_err(|e| e.to_string())?;
    for (seed, row) in table.iter().enumerate() {
        ensure(row[0] > row[1] && row[1] > row[2], || format!("seed {}: {row:?}", seed + 1))?;
    }

    let small = gen_qaoa_mirrored(5, &path_edges(5), &[0.7], &[0.4]).unwrap();
    let layout = Layout::trivial(&hic_core::cut::lower_for_cutting(&small));
    let line = hic_core::hardware::CouplingMap::new(5, (0..4).map(|i| (i, i + 1)));
    let noise = NoiseProfile::uniform(&line, 0.03, 1e-3, 0.02);
    let obs = Observable::mean_z(5);
    let run = |jobs| {
        let cfg = NoisyConfig { shots: SHOTS, seed: 21, readout_flips: true, jobs };
        noisy_expectation(&layout, &noise, &obs, &cfg).unwrap()
    };
    let first = run(1);
    for jobs in [0, 2, 4, 8] {
        ensure(run(jobs) == first, || format!("differs with jobs={jobs}"))?;
    }
    let means: Vec<String> = table.iter().map(|r| format!("{:.3}/{:.3}/{:.3}", r[0], r[1], r[2])).collect();
    Ok(format!("fidelity at 0.5x/1x/2x per seed: {}", means.join(" ")))
}

fn main() {
    type Named = (&'static str, fn() -> Check);
    let checks: [Named; 9] = [
        ("1 table1", table_one),
        ("2 qpd-exactness", qpd_exactness),
        ("3 channel-identities", channels),
        ("4 table4-arithmetic", table_four),
        ("5 overhead-reduction", overhead_reduction),
        ("6 puncturing", puncturing),
        ("7 selection", selection),
        ("8 correlation", correlation),
        ("9 noisy-sanity", noisy_sanity),
    ];
    let mut failed = 0;
    let mut total = Duration::ZERO;
    for (name, f) in checks {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let dt = t.elapsed();
        total += dt;
        match outcome {
            Ok(msg) => println!("PASS {name} [{:.2}s] {msg}", dt.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name} [{:.2}s] {msg}", dt.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed in {:.1}s", 9 - failed, total.as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
