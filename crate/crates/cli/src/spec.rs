//! Experiment specification: config file, flag overrides and validation.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hic_core::circuit::generators::{
    gen_ising_1d, gen_qaoa, gen_qaoa_mirrored, gen_random_clifford, path_edges, ring_edges,
};
use hic_core::circuit::qasm::parse_qasm;
use hic_core::circuit::Circuit;
use hic_core::fixtures;
use hic_core::hardware::{load_calibration, CalibrationSnapshot};
use serde::{Deserialize, Serialize};

use crate::InputError;

pub const DEFAULT_SHOTS: u64 = 4096;
pub const DEFAULT_Z: f64 = 2.0;
pub const DEFAULT_K_MAX: usize = 4;

/// Seed used when neither a flag nor the config file sets one.
pub fn default_seed() -> Result<u64> {
    match std::env::var("HIC_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| InputError(format!("HIC_SEED is not an unsigned integer: {s:?}")).into()),
        Err(_) => Ok(0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Exact,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Path,
    Ring,
}

impl GraphKind {
    pub fn edges(self, n: usize) -> Vec<(usize, usize)> {
        match self {
            GraphKind::Path => path_edges(n),
            GraphKind::Ring => ring_edges(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Ising {
        n: usize,
        steps: usize,
        theta_zz: f64,
        theta_x: f64,
    },
    Qaoa {
        n: usize,
        graph: GraphKind,
        gammas: Vec<f64>,
        betas: Vec<f64>,
        #[serde(default)]
        mirrored: bool,
    },
    Clifford {
        n: usize,
        depth: usize,
        seed: u64,
    },
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<Circuit> {
        let c = match self {
            GeneratorSpec::Ising { n, steps, theta_zz, theta_x } => gen_ising_1d(*n, *steps, *theta_zz, *theta_x),
            GeneratorSpec::Qaoa { n, graph, gammas, betas, mirrored } => {
                let edges = graph.edges(*n);
                if *mirrored {
                    gen_qaoa_mirrored(*n, &edges, gammas, betas)
                } else {
                    gen_qaoa(*n, &edges, gammas, betas)
                }
            }
            GeneratorSpec::Clifford { n, depth, seed } => gen_random_clifford(*n, *depth, *seed),
        };
        c.map_err(|e| InputError(e.to_string()).into())
    }
}

/// A file path, a bundled fixture (`builtin:<name>`) or a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CircuitSource {
    Generator(GeneratorSpec),
    Named(String),
}

impl CircuitSource {
    pub fn load(&self, base: &Path) -> Result<Circuit> {
        match self {
            CircuitSource::Generator(g) => g.build(),
            CircuitSource::Named(s) => load_circuit(s, base),
        }
    }
}

pub fn load_circuit(s: &str, base: &Path) -> Result<Circuit> {
    if let Some(name) = s.strip_prefix("builtin:") {
        let known = || fixtures::CIRCUITS.map(|c| c.0).join(", ");
        let parsed = fixtures::circuit(name)
            .ok_or_else(|| InputError(format!("unknown builtin circuit {name:?} (known: {})", known())))?;
        return parsed.map_err(|e| InputError(e.to_string()).into());
    }
    let path = base.join(s);
    let text = std::fs::read_to_string(&path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    parse_qasm(&text).map_err(|e| InputError(format!("{}: {e}", path.display())).into())
}

pub fn load_snapshot(s: &str, base: &Path) -> Result<CalibrationSnapshot> {
    if let Some(name) = s.strip_prefix("builtin:") {
        let known = || fixtures::CALIBRATIONS.map(|c| c.0).join(", ");
        let parsed = fixtures::calibration(name)
            .ok_or_else(|| InputError(format!("unknown builtin calibration {name:?} (known: {})", known())))?;
        return parsed.map_err(|e| InputError(e.to_string()).into());
    }
    let path = base.join(s);
    load_calibration(&path).map_err(|e| InputError(format!("{}: {e}", path.display())).into())
}

/// Config file contents; every field optional so flags can fill the gaps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub circuit: Option<CircuitSource>,
    pub calibration: Option<String>,
    pub z_v: Option<f64>,
    pub z_e: Option<f64>,
    pub k_max: Option<usize>,
    pub backend: Option<Backend>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub execute_baseline: Option<bool>,
    pub dry_run: Option<bool>,
}

impl SpecFile {
    pub fn read(path: &Path) -> Result<SpecFile> {
        let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())).into())
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: SpecFile) -> SpecFile {
        SpecFile {
            circuit: over.circuit.or(self.circuit),
            calibration: over.calibration.or(self.calibration),
            z_v: over.z_v.or(self.z_v),
            z_e: over.z_e.or(self.z_e),
            k_max: over.k_max.or(self.k_max),
            backend: over.backend.or(self.backend),
            shots: over.shots.or(self.shots),
            seed: over.seed.or(self.seed),
            output: over.output.or(self.output),
            execute_baseline: over.execute_baseline.or(self.execute_baseline),
            dry_run: over.dry_run.or(self.dry_run),
        }
    }
}

/// Fully resolved and validated run parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub circuit_source: CircuitSource,
    pub calibration_source: String,
    pub z_v: f64,
    pub z_e: f64,
    pub k_max: usize,
    pub backend: Backend,
    pub shots: u64,
    pub seed: u64,
    pub output: PathBuf,
    pub execute_baseline: bool,
    pub dry_run: bool,
    #[serde(skip)]
    pub circuit: Circuit,
    #[serde(skip)]
    pub snapshot: CalibrationSnapshot,
}

impl ExperimentSpec {
    /// Resolve against defaults and load every input. Relative paths in a
    /// config file are taken from the file's directory.
    pub fn resolve(file: SpecFile, base: &Path) -> Result<ExperimentSpec> {
        let circuit_source = file.circuit.ok_or_else(|| InputError("no circuit given".into()))?;
        let calibration_source = file.calibration.ok_or_else(|| InputError("no calibration given".into()))?;
        let z_v = file.z_v.unwrap_or(DEFAULT_Z);
        let z_e = file.z_e.unwrap_or(DEFAULT_Z);
        for (name, z) in [("z_v", z_v), ("z_e", z_e)] {
            if !z.is_finite() || z <= 0.0 {
                bail!(InputError(format!("{name} must be positive and finite, got {z}")));
            }
        }
        let shots = file.shots.unwrap_or(DEFAULT_SHOTS);
        if shots == 0 {
            bail!(InputError("shots must be positive".into()));
        }
        let seed = match file.seed {
            Some(s) => s,
            None => default_seed()?,
        };
        let circuit = circuit_source.load(base).context("loading circuit")?;
        let snapshot = load_snapshot(&calibration_source, base).context("loading calibration")?;
        Ok(ExperimentSpec {
            circuit_source,
            calibration_source,
            z_v,
            z_e,
            k_max: file.k_max.unwrap_or(DEFAULT_K_MAX),
            backend: file.backend.unwrap_or(Backend::Noisy),
            shots,
            seed,
            output: file.output.map(|o| base.join(o)).unwrap_or_else(|| PathBuf::from("hic-out")),
            execute_baseline: file.execute_baseline.unwrap_or(false),
            dry_run: file.dry_run.unwrap_or(false),
            circuit,
            snapshot,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_generator_and_builtin() {
        let f: SpecFile = toml::from_str(
            r#"
            calibration = "builtin:line9_islands"
            k_max = 8
            [circuit]
            generator = "ising"
            n = 6
            steps = 2
            theta_zz = 0.3
            theta_x = 0.2
            "#,
        )
        .unwrap();
        let spec = ExperimentSpec::resolve(f, Path::new(".")).unwrap();
        assert_eq!(spec.circuit.num_qubits(), 6);
        assert_eq!(spec.k_max, 8);
        assert_eq!(spec.shots, DEFAULT_SHOTS);
    }

    #[test]
    fn flags_override_file() {
        let file = SpecFile { k_max: Some(2), shots: Some(10), ..SpecFile::default() };
        let flags = SpecFile { k_max: Some(5), ..SpecFile::default() };
        let m = file.overlay(flags);
        assert_eq!((m.k_max, m.shots), (Some(5), Some(10)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<SpecFile>("kmax = 3").is_err());
    }
}
