//! Bundled reproduction experiments.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use hic_core::circuit::generators::{gen_ising_1d, gen_qaoa_mirrored, ring_edges};
use hic_core::circuit::Observable;
use hic_core::cut::OracleConfig;
use hic_core::experiments::{fig5_correlation, mirrored_fidelity, table1, table4_arith, CorrelationConfig};
use hic_core::fixtures;
use hic_core::qpd::{execute_exact, generate_subexperiments, reconstruct};
use hic_core::select::{compare_with_baseline, select};
use serde::Serialize;

use crate::run::{self, write_csv, write_json};
use crate::spec::{Backend, CircuitSource, ExperimentSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    Table1,
    #[value(name = "table4_arith")]
    Table4Arith,
    #[value(name = "fig5_correlation")]
    Fig5Correlation,
    Ising20,
    #[value(name = "qaoa_mirrored")]
    QaoaMirrored,
    All,
}

impl Experiment {
    const EACH: [Experiment; 5] = [
        Experiment::Table1,
        Experiment::Table4Arith,
        Experiment::Fig5Correlation,
        Experiment::Ising20,
        Experiment::QaoaMirrored,
    ];

    fn name(self) -> &'static str {
        match self {
            Experiment::Table1 => "table1",
            Experiment::Table4Arith => "table4_arith",
            Experiment::Fig5Correlation => "fig5_correlation",
            Experiment::Ising20 => "ising20",
            Experiment::QaoaMirrored => "qaoa_mirrored",
            Experiment::All => "all",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub status: &'static str,
    pub seconds: f64,
    pub detail: String,
}

struct Outcome {
    pass: bool,
    detail: String,
}

const TABLE1_EXPECTED: [(usize, usize, usize, u128); 3] = [(3, 4, 0, 6561), (4, 2, 1, 1296), (5, 2, 1, 1296)];
const TABLE4_EXPECTED: [f64; 2] = [0.4542, 0.4308];
const TABLE4_TOL: f64 = 5e-4;
const MIN_RATIO: f64 = 4.0;
const EXACT_TOL: f64 = 1e-9;

fn table_one(dir: &Path) -> Result<Outcome> {
    let ds: Vec<usize> = TABLE1_EXPECTED.iter().map(|r| r.0).collect();
    let rows = table1(&ds, 8, &OracleConfig::default())?;
    write_csv(&dir.join("table1.csv"), &rows)?;
    write_json(&dir.join("report.json"), &rows)?;
    let pass = rows.iter().zip(TABLE1_EXPECTED).all(|(r, (_, g, w, ex))| {
        (r.gate_cuts, r.wire_cuts, r.executions) == (g, w, ex) && r.search_executions == Some(ex)
    });
    let detail = rows
        .iter()
        .map(|r| format!("d={}: {}G+{}W={}", r.d, r.gate_cuts, r.wire_cuts, r.executions))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(Outcome { pass, detail })
}

fn table_four(dir: &Path) -> Result<Outcome> {
    let got = table4_arith()?;
    #[derive(Serialize)]
    struct Row {
        strategy: usize,
        w_s: f64,
        expected: f64,
    }
    let rows: Vec<Row> = got
        .iter()
        .zip(TABLE4_EXPECTED)
        .enumerate()
        .map(|(i, (&w_s, expected))| Row { strategy: i + 1, w_s, expected })
        .collect();
    write_csv(&dir.join("table4.csv"), &rows)?;
    write_json(&dir.join("report.json"), &rows)?;
    let pass = rows.iter().all(|r| (r.w_s - r.expected).abs() < TABLE4_TOL);
    Ok(Outcome { pass, detail: format!("W_s = {:.4}, {:.4}", got[0], got[1]) })
}

fn fig_five(dir: &Path, seed: u64) -> Result<Outcome> {
    let cfg = CorrelationConfig { seed, ..CorrelationConfig::default() };
    let rows = fig5_correlation(&cfg)?;
    write_csv(&dir.join("fig5_correlation.csv"), &rows)?;
    let high = rows.iter().filter(|r| r.pearson_r > 0.9).count();
    #[derive(Serialize)]
    struct Report<'a> {
        config: &'a CorrelationConfig,
        rows: &'a [hic_core::experiments::CorrelationRow],
        above_0_9: usize,
        fraction_above_0_9: f64,
    }
    write_json(
        &dir.join("report.json"),
        &Report {
            config: &cfg,
            rows: &rows,
            above_0_9: high,
            fraction_above_0_9: high as f64 / rows.len().max(1) as f64,
        },
    )?;
    let expected = cfg.sizes.len() * cfg.circuits_per_size;
    let pass = rows.len() == expected && rows.iter().all(|r| (-1.0..=1.0).contains(&r.pearson_r));
    Ok(Outcome { pass, detail: format!("{} coefficients, {high} above 0.9", rows.len()) })
}

fn ising_twenty(dir: &Path) -> Result<Outcome> {
    let c = gen_ising_1d(20, 2, 0.3, 0.2)?;
    let snap = fixtures::calibration("falcon27").expect("bundled")?;
    #[derive(Serialize)]
    struct Row {
        k_max: usize,
        winner_d: Option<usize>,
        gate_cuts: Option<usize>,
        wire_cuts: Option<usize>,
        executions: Option<u128>,
        w_s: Option<f64>,
        baseline_d: usize,
        baseline_executions: Option<u128>,
        baseline_w_s: Option<f64>,
    }
    let mut rows = Vec::new();
    let mut pass = true;
    let mut last_ws = f64::INFINITY;
    for k in 1..=6 {
        let sel = select(&c, &snap, 2.0, 2.0, k)?;
        let w = sel.winner.as_ref();
        let s = w.and_then(|w| w.strategy.as_ref());
        if let Some(ws) = w.and_then(|w| w.w_s) {
            pass &= ws <= last_ws && s.is_some_and(|s| s.num_cuts() <= k);
            pass &= sel.all_candidates.iter().filter(|e| e.feasible).all(|e| ws <= e.w_s.unwrap_or(f64::INFINITY));
            last_ws = ws;
        } else {
            pass &= last_ws.is_infinite();
        }
        rows.push(Row {
            k_max: k,
            winner_d: w.map(|w| w.d),
            gate_cuts: s.map(|s| s.num_gate_cuts),
            wire_cuts: s.map(|s| s.num_wire_cuts),
            executions: s.map(|s| s.canonical_executions()),
            w_s: w.and_then(|w| w.w_s),
            baseline_d: sel.baseline_whole.d,
            baseline_executions: sel.baseline_whole.executions(),
            baseline_w_s: sel.baseline_whole.w_s,
        });
    }
    write_csv(&dir.join("budgets.csv"), &rows)?;
    write_json(&dir.join("report.json"), &rows)?;
    let found = rows.iter().filter(|r| r.winner_d.is_some()).count();
    Ok(Outcome { pass: pass && found > 0, detail: format!("winners for {found}/6 budgets") })
}

fn qaoa_mirrored(dir: &Path, seed: u64) -> Result<Outcome> {
    let snap = fixtures::calibration("heavy_hex_islands").expect("bundled")?;
    let c = fixtures::circuit("qaoa12_mirrored").expect("bundled")?;
    let (sel, cmp) = compare_with_baseline(&c, &snap, 1.0, 3.0, 4)?;
    let cmp = cmp.context("no comparison for the bundled fixture")?;
    let winner = sel.winner.as_ref().context("no winner for the bundled fixture")?;

    let obs = Observable::mean_z(c.num_qubits());
    let strategy = winner.strategy.as_ref().expect("winners carry a strategy");
    let set = generate_subexperiments(strategy, &obs)?;
    let exact = reconstruct(&set, &execute_exact(&set)?, 0)?.expectation;

    let spec = ExperimentSpec {
        circuit_source: CircuitSource::Named("builtin:qaoa12_mirrored".into()),
        calibration_source: "builtin:heavy_hex_islands".into(),
        z_v: 1.0,
        z_e: 3.0,
        k_max: 4,
        backend: Backend::Noisy,
        shots: crate::spec::DEFAULT_SHOTS,
        seed,
        output: dir.to_path_buf(),
        execute_baseline: false,
        dry_run: false,
        circuit: c,
        snapshot: snap,
    };
    let report = run::run(spec)?;
    run::write_report(dir, &report)?;
    let noisy = report.winner_execution.as_ref().map(|e| e.result.expectation);

    let falcon = fixtures::calibration("falcon27").expect("bundled")?;
    let small = gen_qaoa_mirrored(8, &ring_edges(8), &[0.4], &[0.3])?;
    let scales = [0.5, 1.0, 2.0];
    let cfg = hic_core::sim::NoisyConfig { shots: crate::spec::DEFAULT_SHOTS, seed, readout_flips: true, jobs: 0 };
    let fid = mirrored_fidelity(&small, &falcon, &scales, &[seed], &cfg)?;
    #[derive(Serialize)]
    struct FidelityRow {
        scale: f64,
        fidelity: f64,
    }
    write_csv(
        &dir.join("fidelity_vs_scale.csv"),
        scales.iter().zip(&fid[0]).map(|(&scale, &fidelity)| FidelityRow { scale, fidelity }),
    )?;
    let monotone = fid[0].windows(2).all(|w| w[0] > w[1]);

    let pass = cmp.execution_ratio >= MIN_RATIO
        && cmp.winner_executions <= cmp.baseline_executions
        && (exact - 1.0).abs() < EXACT_TOL
        && noisy.is_some_and(|v| v > 0.0 && v <= 1.0 + 1e-9)
        && monotone;
    Ok(Outcome {
        pass,
        detail: format!(
            "ratio {:.1}x, exact {exact:.6}, noisy {:.4}, fidelity {:.3}/{:.3}/{:.3}",
            cmp.execution_ratio,
            noisy.unwrap_or(f64::NAN),
            fid[0][0],
            fid[0][1],
            fid[0][2]
        ),
    })
}

/// Run the selected experiments under `out/<name>/` and write
/// `summary.csv` / `summary.json`. Returns the summary rows.
pub fn reproduce(which: Experiment, out: &Path, seed: u64) -> Result<Vec<SummaryRow>> {
    let list: Vec<Experiment> = match which {
        Experiment::All => Experiment::EACH.to_vec(),
        e => vec![e],
    };
    let mut summary = Vec::new();
    for e in list {
        let dir = out.join(e.name());
        fs::create_dir_all(&dir).with_context(|| dir.display().to_string())?;
        let t = Instant::now();
        let outcome = match e {
            Experiment::Table1 => table_one(&dir),
            Experiment::Table4Arith => table_four(&dir),
            Experiment::Fig5Correlation => fig_five(&dir, seed),
            Experiment::Ising20 => ising_twenty(&dir),
            Experiment::QaoaMirrored => qaoa_mirrored(&dir, seed),
            Experiment::All => unreachable!(),
        };
        let (status, detail) = match outcome {
            Ok(o) => (if o.pass { "PASS" } else { "FAIL" }, o.detail),
            Err(err) => ("FAIL", format!("{err:#}")),
        };
        summary.push(SummaryRow { experiment: e.name().into(), status, seconds: t.elapsed().as_secs_f64(), detail });
    }
    write_csv(&out.join("summary.csv"), &summary)?;
    Ok(summary)
}
