//! Subexperiment generation and expectation-value reconstruction.
//!
//! Every cut contributes one QPD term per combination. The local operations a
//! combination places in a subcircuit fix that subcircuit's variant circuit;
//! variants are deduplicated by content. Which mid-circuit measurements carry
//! a ±1 sign is tracked separately as a bit mask over the variant's
//! measurement slots (in circuit order), so signed and unsigned uses of the
//! same circuit share one execution.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{decompose_gate_cut, decompose_wire_cut, QpdError};
use crate::circuit::{Circuit, Gate, GateKind, Observable, PauliString};
use crate::cut::{CutAction, CutSide, CutStrategy};
use crate::hardware::NoiseProfile;
use crate::layout::{route_fixed, LayoutError, ScoredPlacement};
use crate::puncture::Component;
use crate::sim::{self, NoisyConfig, NoisyProgram, SimError};

type SlotMap = BTreeMap<(usize, usize), Vec<usize>>;
type VariantIndex = HashMap<Vec<Vec<GateKind>>, (usize, SlotMap)>;

/// Default ceiling on the number of term combinations.
pub const MAX_COMBINATIONS: u128 = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubexperimentError {
    #[error(transparent)]
    Qpd(#[from] QpdError),
    #[error("{0} term combinations exceed the limit of {MAX_COMBINATIONS}")]
    TooManyCombinations(u128),
    #[error("observable term touches qubit {qubit} outside the {num_qubits}-qubit circuit")]
    ObservableOutOfRange { qubit: usize, num_qubits: usize },
    #[error("variant circuit has {0} measurement slots; at most 64 are supported")]
    TooManySlots(usize),
    #[error("missing result for subcircuit {subcircuit} variant {variant}")]
    MissingResult { subcircuit: usize, variant: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("expected {expected} placements, got {got}")]
    PlacementCount { expected: usize, got: usize },
    #[error("placement refers to unknown component {0}")]
    UnknownComponent(usize),
}

/// One deduplicated circuit for a subcircuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub circuit: Circuit,
    /// Number of `Measure` gates (sign slots) in `circuit`.
    pub num_slots: usize,
    /// Requested `(fragment index, sign mask)` pairs, sorted.
    pub requests: Vec<(usize, u64)>,
}

/// A term combination: its coefficient and, per subcircuit, the variant and
/// sign mask it uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combo {
    pub coefficient: f64,
    pub picks: Vec<(usize, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableTerm {
    pub coefficient: f64,
    /// Fragment index per subcircuit.
    pub fragments: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubexperimentSet {
    /// `[subcircuit][variant]`.
    pub variants: Vec<Vec<Variant>>,
    /// `[subcircuit][fragment]`: observable pieces on subcircuit-local qubits.
    pub fragments: Vec<Vec<PauliString>>,
    pub observable_terms: Vec<ObservableTerm>,
    pub combos: Vec<Combo>,
    /// Terms per cut, in strategy action order.
    pub terms_per_cut: Vec<usize>,
}

impl SubexperimentSet {
    /// `Π terms per cut`, including zero-coefficient combinations that are
    /// not materialised.
    pub fn num_term_combinations(&self) -> u128 {
        self.terms_per_cut.iter().map(|&k| k as u128).product()
    }

    /// Total distinct circuits to execute.
    pub fn actual_subexperiments(&self) -> usize {
        self.variants.iter().map(Vec::len).sum()
    }
}

/// Estimate of one requested quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// `[subcircuit][variant][request]`, aligned with [`Variant::requests`].
pub type VariantResults = Vec<Vec<Vec<Estimate>>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub expectation: f64,
    pub std_error: f64,
    pub shots_used: u64,
}

/// What one cut side inserts into a subcircuit for a given term.
#[derive(Clone)]
struct SideOps {
    ops: Vec<GateKind>,
    signed: bool,
}

struct CutTerms {
    coefficients: Vec<f64>,
    /// Per term: ops for (first side, second side), i.e. left/right or
    /// upstream/downstream.
    sides: Vec<(SideOps, SideOps)>,
}

fn cut_terms(strategy: &CutStrategy, a: &CutAction) -> Result<CutTerms, QpdError> {
    Ok(match *a {
        CutAction::GateCut { gate } => {
            let terms = decompose_gate_cut(&strategy.circuit.gates()[gate])?;
            CutTerms {
                coefficients: terms.iter().map(|t| t.coefficient).collect(),
                sides: terms
                    .into_iter()
                    .map(|t| (SideOps { ops: t.left, signed: true }, SideOps { ops: t.right, signed: true }))
                    .collect(),
            }
        }
        CutAction::WireCut { .. } => {
            let terms = decompose_wire_cut();
            CutTerms {
                coefficients: terms.iter().map(|t| t.coefficient).collect(),
                sides: terms
                    .into_iter()
                    .map(|t| (SideOps { ops: t.measure, signed: t.signed }, SideOps { ops: t.prepare, signed: false }))
                    .collect(),
            }
        }
    })
}

/// Segment id for each operand of each gate of the strategy's circuit.
fn gate_segments(s: &CutStrategy) -> Vec<Vec<usize>> {
    let mut by_qubit: Vec<Vec<usize>> = vec![Vec::new(); s.circuit.num_qubits()];
    for (id, seg) in s.segments.iter().enumerate() {
        by_qubit[seg.qubit].push(id);
    }
    s.circuit
        .gates()
        .iter()
        .enumerate()
        .map(|(t, g)| {
            g.qubits()
                .iter()
                .map(|&q| {
                    *by_qubit[q]
                        .iter()
                        .find(|&&id| {
                            let seg = &s.segments[id];
                            seg.first_gate.is_some_and(|f| f <= t) && seg.last_gate.is_some_and(|l| t <= l)
                        })
                        .expect("gate lies on a segment")
                })
                .collect()
        })
        .collect()
}

/// Location of one incident cut side inside a subcircuit.
#[derive(Clone, Copy)]
struct SideSlot {
    cut: usize,
    /// 0 = first side (left/upstream), 1 = second side (right/downstream).
    which: usize,
}

struct VariantBuilder<'a> {
    strategy: &'a CutStrategy,
    seg_of: Vec<Vec<usize>>,
    /// Cut index per gate-cut gate.
    gate_cut_at: HashMap<usize, usize>,
    /// Cut index per segment for wire cuts: (as upstream, as downstream).
    wire_up: HashMap<usize, usize>,
    wire_down: HashMap<usize, usize>,
}

impl<'a> VariantBuilder<'a> {
    fn new(strategy: &'a CutStrategy) -> Self {
        let seg_of = gate_segments(strategy);
        let mut gate_cut_at = HashMap::new();
        let mut wire_up = HashMap::new();
        let mut wire_down = HashMap::new();
        for (i, a) in strategy.actions.iter().enumerate() {
            match *a {
                CutAction::GateCut { gate } => {
                    gate_cut_at.insert(gate, i);
                }
                CutAction::WireCut { qubit, after_gate } => {
                    let pos = strategy.circuit.gates()[after_gate].qubits().iter().position(|&q| q == qubit).unwrap();
                    let up = seg_of[after_gate][pos];
                    wire_up.insert(up, i);
                    wire_down.insert(up + 1, i);
                }
            }
        }
        VariantBuilder { strategy, seg_of, gate_cut_at, wire_up, wire_down }
    }

    /// Build the circuit of subcircuit `sub` with `ops[cut]` giving the chosen
    /// side operations of each incident cut. Returns the circuit and, per
    /// incident side, the slot indices of its measurements.
    fn build(
        &self,
        sub: usize,
        choose: &dyn Fn(usize, usize) -> Vec<GateKind>,
    ) -> (Circuit, BTreeMap<(usize, usize), Vec<usize>>) {
        let s = self.strategy;
        let width = s.subcircuits[sub].width;
        let mut c = Circuit::new(format!("{}_sub{sub}", s.circuit.name()), width);
        let mut slots: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        let mut next_slot = 0usize;
        let mut emit = |c: &mut Circuit, ops: &[GateKind], q: usize, key: (usize, usize)| {
            for &k in ops {
                if k == GateKind::Measure {
                    slots.entry(key).or_default().push(next_slot);
                    next_slot += 1;
                }
                c.push_unchecked(Gate::single(k, q));
            }
        };
        let in_sub = |seg: usize| s.segments[seg].subcircuit == sub;
        let local = |seg: usize| s.segments[seg].local_qubit;
        for (t, g) in s.circuit.gates().iter().enumerate() {
            let segs = &self.seg_of[t];
            for &seg in segs {
                if in_sub(seg) && s.segments[seg].first_gate == Some(t) {
                    if let Some(&cut) = self.wire_down.get(&seg) {
                        emit(&mut c, &choose(cut, 1), local(seg), (cut, 1));
                    }
                }
            }
            if let Some(&cut) = self.gate_cut_at.get(&t) {
                for (which, &seg) in segs.iter().enumerate() {
                    if in_sub(seg) {
                        emit(&mut c, &choose(cut, which), local(seg), (cut, which));
                    }
                }
            } else if segs.iter().all(|&seg| in_sub(seg)) {
                c.push_unchecked(g.remapped(|q| {
                    let pos = g.qubits().iter().position(|&x| x == q).unwrap();
                    local(segs[pos])
                }));
            }
            for &seg in segs {
                if in_sub(seg) && s.segments[seg].last_gate == Some(t) {
                    if let Some(&cut) = self.wire_up.get(&seg) {
                        emit(&mut c, &choose(cut, 0), local(seg), (cut, 0));
                    }
                }
            }
        }
        (c, slots)
    }
}

/// Factor each observable term over the subcircuits holding the final
/// segment of each qubit.
fn split_observable(
    s: &CutStrategy,
    obs: &Observable,
) -> Result<(Vec<Vec<PauliString>>, Vec<ObservableTerm>), SubexperimentError> {
    let n = s.circuit.num_qubits();
    let nsub = s.subcircuits.len();
    let mut fragments: Vec<Vec<PauliString>> = vec![vec![PauliString::identity()]; nsub];
    let mut index: Vec<HashMap<PauliString, usize>> = vec![HashMap::from([(PauliString::identity(), 0)]); nsub];
    let mut terms = Vec::new();
    for (coef, p) in &obs.terms {
        let mut per_sub: Vec<BTreeMap<usize, crate::circuit::Pauli>> = vec![BTreeMap::new(); nsub];
        for (&q, &pauli) in &p.0 {
            if q >= n {
                return Err(SubexperimentError::ObservableOutOfRange { qubit: q, num_qubits: n });
            }
            let seg = &s.segments[s.final_segment(q)];
            per_sub[seg.subcircuit].insert(seg.local_qubit, pauli);
        }
        let frag_ids = per_sub
            .into_iter()
            .enumerate()
            .map(|(sub, m)| {
                let ps = PauliString(m);
                *index[sub].entry(ps.clone()).or_insert_with(|| {
                    fragments[sub].push(ps);
                    fragments[sub].len() - 1
                })
            })
            .collect();
        terms.push(ObservableTerm { coefficient: *coef, fragments: frag_ids });
    }
    Ok((fragments, terms))
}

/// Expand every cut into its QPD terms and collect the deduplicated variant
/// circuits and coefficient table.
pub fn generate_subexperiments(s: &CutStrategy, obs: &Observable) -> Result<SubexperimentSet, SubexperimentError> {
    let cuts: Vec<CutTerms> = s.actions.iter().map(|a| cut_terms(s, a)).collect::<Result<_, _>>()?;
    let terms_per_cut: Vec<usize> = cuts.iter().map(|c| c.coefficients.len()).collect();
    let total: u128 = terms_per_cut.iter().map(|&k| k as u128).product();
    if total > MAX_COMBINATIONS {
        return Err(SubexperimentError::TooManyCombinations(total));
    }
    let (fragments, observable_terms) = split_observable(s, obs)?;
    let nsub = s.subcircuits.len();
    let builder = VariantBuilder::new(s);

    // Incident cut sides per subcircuit, in action order.
    let mut incident: Vec<Vec<SideSlot>> = vec![Vec::new(); nsub];
    for sub in &s.subcircuits {
        for (a, side) in &sub.incident_cuts {
            let cut = s.actions.iter().position(|x| x == a).unwrap();
            let which = usize::from(matches!(side, CutSide::Right | CutSide::Downstream));
            incident[sub.id].push(SideSlot { cut, which });
        }
        incident[sub.id].sort_by_key(|x| (x.cut, x.which));
    }

    let mut variants: Vec<Vec<Variant>> = vec![Vec::new(); nsub];
    let mut variant_index: Vec<VariantIndex> = vec![HashMap::new(); nsub];
    let mut pick_cache: Vec<HashMap<Vec<usize>, (usize, u64)>> = vec![HashMap::new(); nsub];
    let mut requests: Vec<Vec<BTreeSet<(usize, u64)>>> = vec![Vec::new(); nsub];
    let mut combos = Vec::new();

    let side_ops = |cut: usize, term: usize, which: usize| -> &SideOps {
        let (a, b) = &cuts[cut].sides[term];
        if which == 0 {
            a
        } else {
            b
        }
    };

    let mut choice = vec![0usize; cuts.len()];
    loop {
        let coefficient: f64 = choice.iter().enumerate().map(|(i, &t)| cuts[i].coefficients[t]).product();
        if coefficient != 0.0 {
            let mut picks = Vec::with_capacity(nsub);
            for sub in 0..nsub {
                let local_choice: Vec<usize> = incident[sub].iter().map(|x| choice[x.cut]).collect();
                if let Some(&p) = pick_cache[sub].get(&local_choice) {
                    picks.push(p);
                    continue;
                }
                let key: Vec<Vec<GateKind>> =
                    incident[sub].iter().map(|x| side_ops(x.cut, choice[x.cut], x.which).ops.clone()).collect();
                if !variant_index[sub].contains_key(&key) {
                    let chosen: HashMap<(usize, usize), Vec<GateKind>> =
                        incident[sub].iter().zip(&key).map(|(x, ops)| ((x.cut, x.which), ops.clone())).collect();
                    let (circuit, slots) = builder.build(sub, &|cut, which| chosen[&(cut, which)].clone());
                    let num_slots = circuit.count_kind(GateKind::Measure);
                    if num_slots > 64 {
                        return Err(SubexperimentError::TooManySlots(num_slots));
                    }
                    variants[sub].push(Variant { circuit, num_slots, requests: Vec::new() });
                    requests[sub].push(BTreeSet::new());
                    variant_index[sub].insert(key.clone(), (variants[sub].len() - 1, slots));
                }
                let (v, slots) = &variant_index[sub][&key];
                let mut mask = 0u64;
                for x in &incident[sub] {
                    if side_ops(x.cut, choice[x.cut], x.which).signed {
                        for &slot in slots.get(&(x.cut, x.which)).into_iter().flatten() {
                            mask |= 1 << slot;
                        }
                    }
                }
                pick_cache[sub].insert(local_choice, (*v, mask));
                picks.push((*v, mask));
            }
            for term in &observable_terms {
                for (sub, &(v, mask)) in picks.iter().enumerate() {
                    requests[sub][v].insert((term.fragments[sub], mask));
                }
            }
            combos.push(Combo { coefficient, picks });
        }
        // Odometer over term choices.
        let mut i = 0;
        while i < choice.len() {
            choice[i] += 1;
            if choice[i] < terms_per_cut[i] {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == choice.len() {
            break;
        }
    }
    for (sub, reqs) in requests.into_iter().enumerate() {
        for (v, r) in reqs.into_iter().enumerate() {
            variants[sub][v].requests = r.into_iter().collect();
        }
    }
    Ok(SubexperimentSet { variants, fragments, observable_terms, combos, terms_per_cut })
}

/// Run every variant on the exact statevector backend.
pub fn execute_exact(set: &SubexperimentSet) -> Result<VariantResults, SubexperimentError> {
    let mut out = Vec::with_capacity(set.variants.len());
    for (sub, vars) in set.variants.iter().enumerate() {
        let mut per_var = Vec::with_capacity(vars.len());
        for v in vars {
            let reqs: Vec<(&PauliString, u64)> = v.requests.iter().map(|&(f, m)| (&set.fragments[sub][f], m)).collect();
            let vals = sim::exact_variant_values(&v.circuit, &reqs)?;
            per_var.push(vals.into_iter().map(|mean| Estimate { mean, std_error: 0.0 }).collect());
        }
        out.push(per_var);
    }
    Ok(out)
}

/// Sample every variant on the device. Each variant is routed from its
/// subcircuit's placement and run for `cfg.shots` shots with its own seed.
pub fn execute_noisy(
    set: &SubexperimentSet,
    placements: &[ScoredPlacement],
    components: &[Component],
    noise: &NoiseProfile,
    cfg: &NoisyConfig,
) -> Result<(VariantResults, u64), SubexperimentError> {
    if placements.len() != set.variants.len() {
        return Err(SubexperimentError::PlacementCount { expected: set.variants.len(), got: placements.len() });
    }
    let mut out = Vec::with_capacity(set.variants.len());
    let mut shots = 0u64;
    for (sub, vars) in set.variants.iter().enumerate() {
        let place = &placements[sub];
        let comp = components
            .iter()
            .find(|c| c.id == place.layout.component_id)
            .ok_or(SubexperimentError::UnknownComponent(place.layout.component_id))?;
        let initial = place.layout.mapping();
        let mut per_var = Vec::with_capacity(vars.len());
        for (v, var) in vars.iter().enumerate() {
            let layout = route_fixed(&var.circuit, comp, noise, &initial)?;
            let mut reqs = Vec::with_capacity(var.requests.len());
            for &(f, mask) in &var.requests {
                let frag = &set.fragments[sub][f];
                if !frag.is_diagonal() {
                    return Err(SimError::NonDiagonal.into());
                }
                let z = frag.0.keys().fold(0u64, |m, &q| m | 1 << layout.final_map[q]);
                reqs.push((z, mask));
            }
            let prog = NoisyProgram::new(&layout.routed, &layout.physical, noise)?;
            let seed = cfg.seed ^ (((sub as u64) << 32) | v as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let run = NoisyConfig { seed, ..*cfg };
            per_var.push(sim::run_noisy_requests(&prog, &run, &reqs)?);
            shots += cfg.shots;
        }
        out.push(per_var);
    }
    Ok((out, shots))
}

/// Combine variant results into the expectation of the observable.
/// `std_error` propagates the per-request standard errors to first order,
/// treating them as independent.
pub fn reconstruct(
    set: &SubexperimentSet,
    results: &VariantResults,
    shots_used: u64,
) -> Result<ReconstructionResult, SubexperimentError> {
    for (sub, vars) in set.variants.iter().enumerate() {
        for (v, var) in vars.iter().enumerate() {
            let ok = results.get(sub).and_then(|r| r.get(v)).is_some_and(|r| r.len() == var.requests.len());
            if !ok {
                return Err(SubexperimentError::MissingResult { subcircuit: sub, variant: v });
            }
        }
    }
    let lookup = |sub: usize, v: usize, frag: usize, mask: u64| -> (usize, Estimate) {
        let reqs = &set.variants[sub][v].requests;
        let i = reqs.binary_search(&(frag, mask)).expect("request recorded at generation");
        (i, results[sub][v][i])
    };
    let with_error = results.iter().flatten().flatten().any(|e| e.std_error > 0.0);
    let mut grad: Vec<Vec<Vec<f64>>> = if with_error {
        set.variants.iter().map(|vs| vs.iter().map(|v| vec![0.0; v.requests.len()]).collect()).collect()
    } else {
        Vec::new()
    };
    let nsub = set.variants.len();
    let mut expectation = 0.0;
    let mut vals = vec![(0usize, 0.0f64); nsub];
    for combo in &set.combos {
        for term in &set.observable_terms {
            let w = combo.coefficient * term.coefficient;
            let mut prod = w;
            for (sub, &(v, mask)) in combo.picks.iter().enumerate() {
                let (i, e) = lookup(sub, v, term.fragments[sub], mask);
                vals[sub] = (i, e.mean);
                prod *= e.mean;
            }
            expectation += prod;
            if with_error {
                for sub in 0..nsub {
                    let others: f64 = (0..nsub).filter(|&o| o != sub).map(|o| vals[o].1).product();
                    let (v, _) = combo.picks[sub];
                    grad[sub][v][vals[sub].0] += w * others;
                }
            }
        }
    }
    let std_error = if with_error {
        let mut var = 0.0;
        for (sub, vs) in grad.iter().enumerate() {
            for (v, gs) in vs.iter().enumerate() {
                for (i, g) in gs.iter().enumerate() {
                    var += (g * results[sub][v][i].std_error).powi(2);
                }
            }
        }
        var.sqrt()
    } else {
        0.0
    };
    Ok(ReconstructionResult { expectation, std_error, shots_used })
}
