mod reproduce;
mod run;
mod spec;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hic_core::circuit::qasm::emit_qasm;
use hic_core::cut::find_cuts;
use hic_core::cut::CutStrategy;
use hic_core::hardware::topology::{gen_topology, NoiseLaw, TopologyKind};
use hic_core::layout::place_and_route;
use hic_core::puncture::{candidate_constraints, puncture, PuncturedMap};
use hic_core::select::{compare, place_strategy, select, strategy_score};
use serde::Serialize;

use crate::spec::{
    load_circuit, load_snapshot, Backend, CircuitSource, ExperimentSpec, GeneratorSpec, GraphKind, SpecFile,
};

const EXIT_INPUT: u8 = 2;
const EXIT_NO_STRATEGY: u8 = 3;

/// Bad user input: exits with code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

#[derive(Parser)]
#[command(name = "hic", version, about = "Noise-aware circuit cutting")]
struct Cli {
    /// Worker threads for candidate evaluation and shot sampling (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Thresholds {
    /// Z-score threshold for qubits.
    #[arg(long, default_value_t = spec::DEFAULT_Z)]
    z_v: f64,
    /// Z-score threshold for couplers.
    #[arg(long, default_value_t = spec::DEFAULT_Z)]
    z_e: f64,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Remove noisy outliers from a calibration and list the islands.
    Puncture {
        /// Calibration JSON file or `builtin:<name>`.
        #[arg(long)]
        calibration: String,
        #[command(flatten)]
        z: Thresholds,
        #[command(flatten)]
        out: Output,
    },
    /// Cheapest cut strategy for one device constraint.
    Find {
        /// QASM file or `builtin:<name>`.
        #[arg(long)]
        circuit: String,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 8)]
        k_max: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Layout score of a strategy's subcircuits, or of the uncut circuit.
    Score {
        #[arg(long)]
        calibration: String,
        /// Uncut circuit placed on the whole device.
        #[arg(long, required_unless_present = "strategy", conflicts_with = "strategy")]
        circuit: Option<String>,
        /// Strategy JSON placed on the punctured islands.
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[command(flatten)]
        z: Thresholds,
        #[command(flatten)]
        out: Output,
    },
    /// Sweep device constraints and pick the lowest weighted score.
    Select(SelectArgs),
    /// Select, then compare the winner with equal partitioning.
    Compare(SelectArgs),
    /// Full pipeline with report files.
    Run(RunArgs),
    /// Run a bundled experiment and write its reports.
    Reproduce {
        name: reproduce::Experiment,
        #[arg(long, default_value = "hic-reproduce")]
        out: PathBuf,
    },
    /// Write a benchmark circuit as QASM.
    GenCircuit {
        #[command(subcommand)]
        kind: GenCircuit,
        #[command(flatten)]
        out: Output,
    },
    /// Write a synthetic calibration snapshot.
    GenCalibration(GenCalibration),
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    circuit: String,
    #[arg(long)]
    calibration: String,
    #[command(flatten)]
    z: Thresholds,
    #[arg(long, default_value_t = spec::DEFAULT_K_MAX)]
    k_max: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    circuit: Option<String>,
    #[arg(long)]
    calibration: Option<String>,
    #[arg(long)]
    z_v: Option<f64>,
    #[arg(long)]
    z_e: Option<f64>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    #[arg(long)]
    shots: Option<u64>,
    /// Defaults to `HIC_SEED`, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also execute the equal-partition strategy.
    #[arg(long)]
    execute_baseline: bool,
    /// Select only; skip execution.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum GenCircuit {
    /// Trotterised transverse-field Ising chain.
    Ising {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        steps: usize,
        #[arg(long, default_value_t = 0.3)]
        theta_zz: f64,
        #[arg(long, default_value_t = 0.2)]
        theta_x: f64,
    },
    /// QAOA ansatz on a path or ring.
    Qaoa {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = GraphKind::Path)]
        graph: GraphKind,
        #[arg(long, value_delimiter = ',', default_value = "0.4")]
        gammas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.3")]
        betas: Vec<f64>,
        /// Append the inverse circuit.
        #[arg(long)]
        mirrored: bool,
    },
    /// Layered random Clifford circuit.
    Clifford {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Defaults to `HIC_SEED`, then 0.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct GenCalibration {
    /// `line:N`, `grid:RxC` or `heavy-hex:CELLS`.
    #[arg(long, value_parser = parse_topology)]
    topology: TopologyKind,
    /// Defaults to `HIC_SEED`, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    spread: Option<f64>,
    #[arg(long)]
    outlier_fraction: Option<f64>,
    #[arg(long)]
    outlier_multiplier: Option<f64>,
    #[command(flatten)]
    out: Output,
}

fn parse_topology(s: &str) -> Result<TopologyKind, String> {
    let (kind, arg) = s.split_once(':').ok_or("expected KIND:SIZE")?;
    let num = |x: &str| x.parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    match kind {
        "line" => Ok(TopologyKind::Line(num(arg)?)),
        "grid" => {
            let (r, c) = arg.split_once('x').ok_or("grid size is RxC")?;
            Ok(TopologyKind::Grid { rows: num(r)?, cols: num(c)? })
        }
        "heavy-hex" | "heavy_hex" => Ok(TopologyKind::HeavyHex(num(arg)?)),
        _ => Err(format!("unknown topology {kind:?}")),
    }
}

fn emit(out: &Output, text: &str) -> Result<()> {
    match &out.out {
        Some(p) => std::fs::write(p, text).with_context(|| p.display().to_string()),
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: &Output, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

fn check_z(z: &Thresholds) -> Result<()> {
    for (name, v) in [("--z-v", z.z_v), ("--z-e", z.z_e)] {
        if !v.is_finite() || v <= 0.0 {
            anyhow::bail!(InputError(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

fn cwd() -> &'static Path {
    Path::new(".")
}

/// Exit status for a successful command.
enum Status {
    Ok,
    NoStrategy,
}

fn dispatch(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Puncture { calibration, z, out } => {
            check_z(&z)?;
            let snap = load_snapshot(&calibration, cwd())?;
            let p = puncture(&snap, z.z_v, z.z_e).map_err(|e| InputError(e.to_string()))?;
            let ds = candidate_constraints(&p).ok();
            #[derive(Serialize)]
            struct Report {
                punctured: PuncturedMap,
                component_sizes: Vec<usize>,
                candidate_constraints: Option<Vec<usize>>,
            }
            let status = if ds.is_some() { Status::Ok } else { Status::NoStrategy };
            emit_json(&out, &Report { component_sizes: p.component_sizes(), punctured: p, candidate_constraints: ds })?;
            Ok(status)
        }
        Command::Find { circuit, d, k_max, out } => {
            let c = load_circuit(&circuit, cwd())?;
            match find_cuts(&c, d, k_max) {
                Some(s) => {
                    emit(&out, &(s.to_json() + "\n"))?;
                    Ok(Status::Ok)
                }
                None => {
                    eprintln!("no strategy with at most {k_max} cuts for d = {d}");
                    Ok(Status::NoStrategy)
                }
            }
        }
        Command::Score { calibration, circuit, strategy, z, out } => {
            check_z(&z)?;
            let snap = load_snapshot(&calibration, cwd())?;
            if let Some(path) = strategy {
                let text =
                    std::fs::read_to_string(&path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
                let s = CutStrategy::from_json(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
                let p = puncture(&snap, z.z_v, z.z_e).map_err(|e| InputError(e.to_string()))?;
                let Some(placements) = place_strategy(&s, &p.components, &snap.noise) else {
                    eprintln!("some subcircuit fits on no island");
                    return Ok(Status::NoStrategy);
                };
                #[derive(Serialize)]
                struct Report<'a> {
                    w_s: Option<f64>,
                    placements: &'a [hic_core::layout::ScoredPlacement],
                }
                emit_json(&out, &Report { w_s: strategy_score(&placements), placements: &placements })?;
            } else {
                let c = load_circuit(circuit.as_deref().expect("clap enforces one source"), cwd())?;
                let lowered = hic_core::cut::lower_for_cutting(&c);
                let whole = PuncturedMap::whole(&snap);
                let Some(p) = place_and_route(&lowered, &whole.components[0], &snap.noise) else {
                    eprintln!("circuit is wider than the device");
                    return Ok(Status::NoStrategy);
                };
                emit_json(&out, &p)?;
            }
            Ok(Status::Ok)
        }
        Command::Select(a) => {
            check_z(&a.z)?;
            let (c, snap) = (load_circuit(&a.circuit, cwd())?, load_snapshot(&a.calibration, cwd())?);
            let sel = select(&c, &snap, a.z.z_v, a.z.z_e, a.k_max).map_err(|e| InputError(e.to_string()))?;
            emit_json(&a.out, &sel)?;
            Ok(if sel.winner.is_some() { Status::Ok } else { Status::NoStrategy })
        }
        Command::Compare(a) => {
            check_z(&a.z)?;
            let (c, snap) = (load_circuit(&a.circuit, cwd())?, load_snapshot(&a.calibration, cwd())?);
            let sel = select(&c, &snap, a.z.z_v, a.z.z_e, a.k_max).map_err(|e| InputError(e.to_string()))?;
            let comparison = compare(&sel);
            #[derive(Serialize)]
            struct Report<T: Serialize> {
                comparison: Option<hic_core::select::Comparison>,
                candidates: Vec<T>,
            }
            let status = if comparison.is_some() { Status::Ok } else { Status::NoStrategy };
            emit_json(&a.out, &Report { comparison, candidates: run::candidate_rows(&sel) })?;
            Ok(status)
        }
        Command::Run(a) => {
            let (file, base) = match &a.config {
                Some(p) => (SpecFile::read(p)?, p.parent().unwrap_or(cwd()).to_path_buf()),
                None => (SpecFile::default(), cwd().to_path_buf()),
            };
            let flags = SpecFile {
                circuit: a.circuit.map(CircuitSource::Named),
                calibration: a.calibration,
                z_v: a.z_v,
                z_e: a.z_e,
                k_max: a.k_max,
                backend: a.backend,
                shots: a.shots,
                seed: a.seed,
                output: a.out,
                execute_baseline: a.execute_baseline.then_some(true),
                dry_run: a.dry_run.then_some(true),
            };
            // Flag paths are relative to the working directory, file paths to the file.
            let file = rebase(file, &base);
            let spec = ExperimentSpec::resolve(file.overlay(flags), cwd())?;
            let dir = spec.output.clone();
            let report = run::run(spec)?;
            run::write_report(&dir, &report)?;
            eprintln!("report written to {}", dir.display());
            Ok(if report.has_winner() { Status::Ok } else { Status::NoStrategy })
        }
        Command::Reproduce { name, out } => {
            let seed = spec::default_seed()?;
            let rows = reproduce::reproduce(name, &out, seed)?;
            for r in &rows {
                println!("{} {} [{:.2}s] {}", r.status, r.experiment, r.seconds, r.detail);
            }
            if rows.iter().any(|r| r.status != "PASS") {
                anyhow::bail!("{} experiment(s) failed", rows.iter().filter(|r| r.status != "PASS").count());
            }
            Ok(Status::Ok)
        }
        Command::GenCircuit { kind, out } => {
            let g = match kind {
                GenCircuit::Ising { n, steps, theta_zz, theta_x } => {
                    GeneratorSpec::Ising { n, steps, theta_zz, theta_x }
                }
                GenCircuit::Qaoa { n, graph, gammas, betas, mirrored } => {
                    GeneratorSpec::Qaoa { n, graph, gammas, betas, mirrored }
                }
                GenCircuit::Clifford { n, depth, seed } => GeneratorSpec::Clifford {
                    n,
                    depth,
                    seed: match seed {
                        Some(s) => s,
                        None => spec::default_seed()?,
                    },
                },
            };
            emit(&out, &emit_qasm(&g.build()?))?;
            Ok(Status::Ok)
        }
        Command::GenCalibration(g) => {
            let d = NoiseLaw::default();
            let law = NoiseLaw {
                spread: g.spread.unwrap_or(d.spread),
                outlier_fraction: g.outlier_fraction.unwrap_or(d.outlier_fraction),
                outlier_multiplier: g.outlier_multiplier.unwrap_or(d.outlier_multiplier),
                ..d
            };
            let seed = match g.seed {
                Some(s) => s,
                None => spec::default_seed()?,
            };
            let snap = gen_topology(g.topology, seed, &law).map_err(|e| InputError(e.to_string()))?;
            emit(&g.out, &(snap.to_json() + "\n"))?;
            Ok(Status::Ok)
        }
    }
}

fn rebase(mut f: SpecFile, base: &Path) -> SpecFile {
    let join = |s: String| if s.starts_with("builtin:") { s } else { base.join(s).to_string_lossy().into_owned() };
    f.circuit = f.circuit.map(|c| match c {
        CircuitSource::Named(s) => CircuitSource::Named(join(s)),
        g => g,
    });
    f.calibration = f.calibration.map(join);
    f.output = f.output.map(|o| base.join(o));
    f
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match dispatch(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NoStrategy) => ExitCode::from(EXIT_NO_STRATEGY),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.downcast_ref::<InputError>().is_some()) {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
