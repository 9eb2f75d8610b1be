//! Drivers for the bundled reproduction experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::generators::{gen_ising_1d, gen_random_clifford};
use crate::circuit::{Circuit, CircuitError, Observable};
use crate::cut::{find_cuts, lower_for_cutting, oracle_min_cuts, OracleConfig, OracleError};
use crate::hardware::topology::{gen_topology, NoiseLaw, TopologyKind};
use crate::hardware::{CalibrationError, CalibrationSnapshot};
use crate::layout::{
    candidate_scores, full_objective, norm_correlation, place_and_route, weighted_score, LayoutError, ObjectiveInputs,
};
use crate::puncture::PuncturedMap;
use crate::sim::{noisy_expectation, NoisyConfig, SimError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("no strategy for d = {0}")]
    NoStrategy(usize),
    #[error("circuit does not fit the device")]
    Unplaceable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub d: usize,
    pub gate_cuts: usize,
    pub wire_cuts: usize,
    pub executions: u128,
    /// Executions of the heuristic search's strategy.
    pub search_executions: Option<u128>,
}

/// The 6-qubit, 2-step Ising circuit used for the cut-count table.
pub fn table1_circuit() -> Circuit {
    gen_ising_1d(6, 2, 0.3, 0.2).expect("fixed parameters are valid")
}

/// Exhaustive optimum and search result for each constraint in `ds`.
pub fn table1(ds: &[usize], max_actions: usize, cfg: &OracleConfig) -> Result<Vec<Table1Row>, ExperimentError> {
    let c = table1_circuit();
    ds.iter()
        .map(|&d| {
            let o = oracle_min_cuts(&c, d, max_actions, cfg)?.ok_or(ExperimentError::NoStrategy(d))?;
            Ok(Table1Row {
                d,
                gate_cuts: o.num_gate_cuts,
                wire_cuts: o.num_wire_cuts,
                executions: o.canonical_executions(),
                search_executions: find_cuts(&c, d, max_actions).map(|s| s.canonical_executions()),
            })
        })
        .collect()
}

/// Weighted scores of the two tabulated strategies.
pub fn table4_arith() -> Result<[f64; 2], ExperimentError> {
    Ok([weighted_score(&[(1, 0.4221), (1, 0.5186), (1, 0.4221)], 3)?, weighted_score(&[(1, 0.4217), (2, 0.4353)], 3)?])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationConfig {
    pub sizes: Vec<usize>,
    pub circuits_per_size: usize,
    pub depth: usize,
    /// Random placement assignments drawn per strategy.
    pub assignments: usize,
    pub k_max: usize,
    pub seed: u64,
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        CorrelationConfig { sizes: vec![10, 20], circuits_per_size: 10, depth: 2, assignments: 32, k_max: 6, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub circuit: String,
    pub num_qubits: usize,
    pub strategies: usize,
    pub samples: usize,
    pub pearson_r: f64,
}

/// Pearson correlation between the weighted-average term and the variance
/// term of the full objective, one coefficient per random circuit.
///
/// Each circuit is cut at every `d` in `⌈n/2⌉..n` that admits a strategy
/// within `k_max`; every subcircuit gets the scores of all its candidate
/// placements on a 27-qubit synthetic device, and each sample is one random
/// choice of placement per subcircuit.
pub fn fig5_correlation(cfg: &CorrelationConfig) -> Result<Vec<CorrelationRow>, ExperimentError> {
    let jobs: Vec<(usize, u64)> =
        cfg.sizes.iter().flat_map(|&n| (0..cfg.circuits_per_size as u64).map(move |i| (n, i))).collect();
    jobs.par_iter()
        .map(|&(n, i)| {
            let seed = cfg.seed.wrapping_add(1000 * n as u64 + i);
            correlation_row(n, seed, cfg)
        })
        .collect()
}

fn correlation_row(n: usize, seed: u64, cfg: &CorrelationConfig) -> Result<CorrelationRow, ExperimentError> {
    let c = gen_random_clifford(n, cfg.depth, seed)?;
    let snap = gen_topology(TopologyKind::HeavyHex(2), seed, &NoiseLaw::default())?;
    let device = PuncturedMap::whole(&snap);
    let comp = &device.components[0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    let mut strategies = 0;
    for d in n.div_ceil(2)..n {
        let Some(s) = find_cuts(&c, d, cfg.k_max) else {
            continue;
        };
        let options: Vec<(usize, Vec<f64>)> =
            s.subcircuits.iter().map(|sub| (sub.width, candidate_scores(&sub.fragment, comp, &snap.noise))).collect();
        if options.iter().any(|(_, o)| o.is_empty()) {
            continue;
        }
        strategies += 1;
        let total: usize = options.iter().map(|o| o.0).sum();
        for _ in 0..cfg.assignments {
            let placements: Vec<(usize, f64)> =
                options.iter().map(|(w, o)| (*w, o[rng.gen_range(0..o.len())])).collect();
            let inp = ObjectiveInputs { placements, n: total, alpha: 0.0 };
            samples.push((weighted_score(&inp.placements, total)?, full_objective(&inp)?));
        }
    }
    Ok(CorrelationRow {
        circuit: c.name().to_string(),
        num_qubits: n,
        strategies,
        samples: samples.len(),
        pearson_r: norm_correlation(&samples)?,
    })
}

/// `⟨(1/n)ΣZ⟩` of a mirrored circuit placed on `snap` (at its calibrated
/// rates) and then simulated with every rate scaled by each factor.
/// Rows follow `seeds`, columns follow `scales`.
pub fn mirrored_fidelity(
    c: &Circuit,
    snap: &CalibrationSnapshot,
    scales: &[f64],
    seeds: &[u64],
    cfg: &NoisyConfig,
) -> Result<Vec<Vec<f64>>, ExperimentError> {
    let lowered = lower_for_cutting(c);
    let device = PuncturedMap::whole(snap);
    let placed = place_and_route(&lowered, &device.components[0], &snap.noise).ok_or(ExperimentError::Unplaceable)?;
    let obs = Observable::mean_z(c.num_qubits());
    seeds
        .iter()
        .map(|&seed| {
            scales
                .iter()
                .map(|&f| {
                    let run = NoisyConfig { seed, ..*cfg };
                    Ok(noisy_expectation(&placed.layout, &snap.noise.scaled(f), &obs, &run)?.mean)
                })
                .collect()
        })
        .collect()
}
