//! Device-constraint sweep and strategy selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::cut::{equal_partition_constraint, find_cuts, CutStrategy, OverheadReport};
use crate::hardware::{CalibrationSnapshot, NoiseProfile};
use crate::layout::{place_and_route, weighted_score, ScoredPlacement};
use crate::puncture::{candidate_constraints, puncture, Component, PunctureError, PuncturedMap};

pub type SelectError = PunctureError;

/// Why a candidate was not eligible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Infeasibility {
    NoStrategy,
    OverBudget,
    Unplaceable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateEvaluation {
    pub d: usize,
    pub strategy: Option<CutStrategy>,
    pub placements: Vec<ScoredPlacement>,
    pub w_s: Option<f64>,
    pub overhead: Option<OverheadReport>,
    pub feasible: bool,
    pub infeasibility: Option<Infeasibility>,
}

impl CandidateEvaluation {
    pub fn num_cuts(&self) -> Option<usize> {
        self.strategy.as_ref().map(CutStrategy::num_cuts)
    }

    pub fn executions(&self) -> Option<u128> {
        self.strategy.as_ref().map(CutStrategy::canonical_executions)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub punctured: PuncturedMap,
    pub winner: Option<CandidateEvaluation>,
    pub all_candidates: Vec<CandidateEvaluation>,
    /// Equal-partition strategy placed on the punctured components.
    pub baseline: CandidateEvaluation,
    /// Equal-partition strategy placed on the whole device.
    pub baseline_whole: CandidateEvaluation,
}

/// Best placement of every subcircuit, each on its own best component
/// (ties go to the lowest component id). `None` if any subcircuit fits nowhere.
pub fn place_strategy(s: &CutStrategy, components: &[Component], noise: &NoiseProfile) -> Option<Vec<ScoredPlacement>> {
    s.subcircuits
        .par_iter()
        .map(|sub| {
            let found: Vec<Option<ScoredPlacement>> =
                components.par_iter().map(|comp| place_and_route(&sub.fragment, comp, noise)).collect();
            found
                .into_iter()
                .flatten()
                .min_by(|a, b| a.score.total_cmp(&b.score).then(a.layout.component_id.cmp(&b.layout.component_id)))
        })
        .collect()
}

/// Weighted score with `n = Σ n_i`.
pub fn strategy_score(placements: &[ScoredPlacement]) -> Option<f64> {
    let items: Vec<(usize, f64)> = placements.iter().map(|p| (p.width, p.score)).collect();
    let n = items.iter().map(|x| x.0).sum();
    weighted_score(&items, n).ok()
}

/// Cut `c` for constraint `d` and place the result. The search stops at the
/// budget, so an over-budget candidate carries no strategy.
pub fn evaluate(
    c: &Circuit,
    d: usize,
    k_max: usize,
    components: &[Component],
    noise: &NoiseProfile,
) -> CandidateEvaluation {
    evaluate_with(c, d, k_max, k_max, components, noise)
}

/// As [`evaluate`] but always reports the optimal strategy, whatever its size.
pub fn evaluate_unbounded(
    c: &Circuit,
    d: usize,
    k_max: usize,
    components: &[Component],
    noise: &NoiseProfile,
) -> CandidateEvaluation {
    evaluate_with(c, d, k_max, usize::MAX, components, noise)
}

fn evaluate_with(
    c: &Circuit,
    d: usize,
    k_max: usize,
    search_budget: usize,
    components: &[Component],
    noise: &NoiseProfile,
) -> CandidateEvaluation {
    let mut ev = CandidateEvaluation {
        d,
        strategy: None,
        placements: Vec::new(),
        w_s: None,
        overhead: None,
        feasible: false,
        infeasibility: None,
    };
    let Some(s) = find_cuts(c, d, search_budget) else {
        ev.infeasibility = Some(if d == 0 || search_budget == usize::MAX {
            Infeasibility::NoStrategy
        } else {
            Infeasibility::OverBudget
        });
        return ev;
    };
    ev.overhead = Some(s.overhead());
    if let Some(p) = place_strategy(&s, components, noise) {
        ev.w_s = strategy_score(&p);
        ev.placements = p;
    }
    ev.infeasibility = if s.num_cuts() > k_max {
        Some(Infeasibility::OverBudget)
    } else if ev.w_s.is_none() {
        Some(Infeasibility::Unplaceable)
    } else {
        None
    };
    ev.feasible = ev.infeasibility.is_none();
    ev.strategy = Some(s);
    ev
}

fn better(a: &CandidateEvaluation, b: &CandidateEvaluation) -> std::cmp::Ordering {
    a.w_s
        .unwrap_or(f64::INFINITY)
        .total_cmp(&b.w_s.unwrap_or(f64::INFINITY))
        .then(a.executions().cmp(&b.executions()))
        .then(a.d.cmp(&b.d))
}

/// Puncture the device, sweep every constraint between the smallest and the
/// largest component size and keep the feasible candidate with the lowest
/// weighted score (ties: fewer executions, then smaller `d`).
pub fn select(
    c: &Circuit,
    snap: &CalibrationSnapshot,
    z_v: f64,
    z_e: f64,
    k_max: usize,
) -> Result<SelectionResult, SelectError> {
    let punctured = puncture(snap, z_v, z_e)?;
    let ds = candidate_constraints(&punctured)?;
    let all_candidates: Vec<CandidateEvaluation> =
        ds.par_iter().map(|&d| evaluate(c, d, k_max, &punctured.components, &snap.noise)).collect();
    let winner = all_candidates.iter().filter(|e| e.feasible).min_by(|a, b| better(a, b)).cloned();
    let d_eq = equal_partition_constraint(c);
    let whole = PuncturedMap::whole(snap);
    let (baseline, baseline_whole) = rayon::join(
        || evaluate_unbounded(c, d_eq, k_max, &punctured.components, &snap.noise),
        || evaluate_unbounded(c, d_eq, k_max, &whole.components, &snap.noise),
    );
    Ok(SelectionResult { punctured, winner, all_candidates, baseline, baseline_whole })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub winner_d: usize,
    pub baseline_d: usize,
    pub winner_cuts: usize,
    pub baseline_cuts: usize,
    /// Baseline cuts minus winner cuts.
    pub delta_cuts: i64,
    pub winner_executions: u128,
    pub baseline_executions: u128,
    /// Baseline executions divided by winner executions.
    pub execution_ratio: f64,
    pub winner_w_s: f64,
    /// Baseline W_s on the punctured components, if placeable there.
    pub baseline_w_s: Option<f64>,
    /// Baseline W_s on the whole device.
    pub baseline_whole_w_s: Option<f64>,
    /// Winner W_s minus whole-device baseline W_s.
    pub delta_w_s: Option<f64>,
}

/// Compare a selection's winner with its equal-partition baseline. `None`
/// when there is no winner or the baseline has no strategy.
pub fn compare(sel: &SelectionResult) -> Option<Comparison> {
    let w = sel.winner.as_ref()?;
    let b = &sel.baseline_whole;
    let (ws, bs) = (w.strategy.as_ref()?, b.strategy.as_ref()?);
    let winner_w_s = w.w_s?;
    let (we, be) = (ws.canonical_executions(), bs.canonical_executions());
    Some(Comparison {
        winner_d: w.d,
        baseline_d: b.d,
        winner_cuts: ws.num_cuts(),
        baseline_cuts: bs.num_cuts(),
        delta_cuts: bs.num_cuts() as i64 - ws.num_cuts() as i64,
        winner_executions: we,
        baseline_executions: be,
        execution_ratio: be as f64 / we as f64,
        winner_w_s,
        baseline_w_s: sel.baseline.w_s,
        baseline_whole_w_s: b.w_s,
        delta_w_s: b.w_s.map(|x| winner_w_s - x),
    })
}

/// [`select`] followed by [`compare`].
pub fn compare_with_baseline(
    c: &Circuit,
    snap: &CalibrationSnapshot,
    z_v: f64,
    z_e: f64,
    k_max: usize,
) -> Result<(SelectionResult, Option<Comparison>), SelectError> {
    let sel = select(c, snap, z_v, z_e, k_max)?;
    let cmp = compare(&sel);
    Ok((sel, cmp))
}
