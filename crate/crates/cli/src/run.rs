//! The end-to-end pipeline and its report files.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use hic_core::circuit::Observable;
use hic_core::puncture::{Component, PuncturedMap};
use hic_core::qpd::{execute_exact, execute_noisy, generate_subexperiments, reconstruct, ReconstructionResult};
use hic_core::select::{compare, select, CandidateEvaluation, Comparison, SelectionResult};
use hic_core::sim::{exact_expectation, NoisyConfig, DEFAULT_QUBIT_CAP};
use serde::Serialize;

use crate::spec::{Backend, ExperimentSpec};

pub const REPORT_SCHEMA: &str = "hic-run-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct Execution {
    pub d: usize,
    pub backend: Backend,
    pub term_combinations: u128,
    pub subexperiments: usize,
    pub result: ReconstructionResult,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub preprocessing_s: f64,
    pub execution_s: f64,
    pub postprocessing_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub spec: ExperimentSpec,
    pub circuit: String,
    pub num_qubits: usize,
    pub selection: SelectionResult,
    pub comparison: Option<Comparison>,
    /// Noiseless `⟨(1/n)ΣZ⟩` of the uncut circuit, when small enough.
    pub ideal_expectation: Option<f64>,
    pub winner_execution: Option<Execution>,
    pub baseline_execution: Option<Execution>,
    /// Kept out of the JSON report so reruns are byte-identical.
    #[serde(skip)]
    pub timing: Timing,
}

impl RunReport {
    pub fn has_winner(&self) -> bool {
        self.selection.winner.is_some()
    }
}

fn execute(
    ev: &CandidateEvaluation,
    components: &[Component],
    spec: &ExperimentSpec,
    obs: &Observable,
    timing: &mut Timing,
) -> Result<Option<Execution>> {
    let Some(strategy) = &ev.strategy else {
        return Ok(None);
    };
    if ev.placements.len() != strategy.subcircuits.len() {
        return Ok(None);
    }
    let t = Instant::now();
    let set = generate_subexperiments(strategy, obs)?;
    timing.preprocessing_s += t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (results, shots) = match spec.backend {
        Backend::Exact => (execute_exact(&set)?, 0),
        Backend::Noisy => {
            let cfg = NoisyConfig { shots: spec.shots, seed: spec.seed, readout_flips: true, jobs: 0 };
            execute_noisy(&set, &ev.placements, components, &spec.snapshot.noise, &cfg)?
        }
    };
    timing.execution_s += t.elapsed().as_secs_f64();

    let t = Instant::now();
    let result = reconstruct(&set, &results, shots)?;
    timing.postprocessing_s += t.elapsed().as_secs_f64();
    Ok(Some(Execution {
        d: ev.d,
        backend: spec.backend,
        term_combinations: set.num_term_combinations(),
        subexperiments: set.actual_subexperiments(),
        result,
    }))
}

pub fn run(spec: ExperimentSpec) -> Result<RunReport> {
    let mut timing = Timing::default();
    let t = Instant::now();
    let selection = select(&spec.circuit, &spec.snapshot, spec.z_v, spec.z_e, spec.k_max)?;
    let comparison = compare(&selection);
    timing.preprocessing_s = t.elapsed().as_secs_f64();

    let n = spec.circuit.num_qubits();
    let obs = Observable::mean_z(n);
    let ideal_expectation = if n <= DEFAULT_QUBIT_CAP { Some(exact_expectation(&spec.circuit, &obs)?) } else { None };

    let mut winner_execution = None;
    let mut baseline_execution = None;
    if !spec.dry_run {
        if let Some(w) = &selection.winner {
            winner_execution = execute(w, &selection.punctured.components, &spec, &obs, &mut timing)
                .context("executing the winning strategy")?;
        }
        if spec.execute_baseline {
            let whole = PuncturedMap::whole(&spec.snapshot);
            baseline_execution = execute(&selection.baseline_whole, &whole.components, &spec, &obs, &mut timing)
                .context("executing the baseline strategy")?;
        }
    }

    Ok(RunReport {
        schema: REPORT_SCHEMA,
        circuit: spec.circuit.name().to_string(),
        num_qubits: n,
        spec,
        selection,
        comparison,
        ideal_expectation,
        winner_execution,
        baseline_execution,
        timing,
    })
}

#[derive(Serialize)]
struct CandidateRow {
    d: usize,
    feasible: bool,
    infeasibility: String,
    gate_cuts: Option<usize>,
    wire_cuts: Option<usize>,
    executions: Option<u128>,
    w_s: Option<f64>,
    subcircuit_widths: String,
    winner: bool,
}

pub fn candidate_rows(sel: &SelectionResult) -> Vec<impl Serialize> {
    sel.all_candidates
        .iter()
        .map(|e| {
            let s = e.strategy.as_ref();
            CandidateRow {
                d: e.d,
                feasible: e.feasible,
                infeasibility: e
                    .infeasibility
                    .map(|i| serde_json::to_value(i).unwrap().as_str().unwrap_or_default().to_string())
                    .unwrap_or_default(),
                gate_cuts: s.map(|s| s.num_gate_cuts),
                wire_cuts: s.map(|s| s.num_wire_cuts),
                executions: e.executions(),
                w_s: e.w_s,
                subcircuit_widths: s
                    .map(|s| s.widths().iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" "))
                    .unwrap_or_default(),
                winner: sel.winner.as_ref().is_some_and(|w| w.d == e.d),
            }
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| path.display().to_string())?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| path.display().to_string())
}

/// `report.json`, `timing.json`, `candidates.csv` and, when a comparison
/// exists, `comparison.csv`.
pub fn write_report(dir: &Path, report: &RunReport) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
    write_json(&dir.join("report.json"), report)?;
    write_json(&dir.join("timing.json"), &report.timing)?;
    write_csv(&dir.join("candidates.csv"), candidate_rows(&report.selection))?;
    if let Some(c) = &report.comparison {
        write_csv(&dir.join("comparison.csv"), [c])?;
    }
    Ok(())
}
