//! Synthetic coupling maps with heterogeneous noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{CalibrationError, CalibrationSnapshot, CouplingMap, NoiseProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Line(usize),
    Grid {
        rows: usize,
        cols: usize,
    },
    /// A chain of 12-qubit rings where neighbouring rings share a three-qubit
    /// path, plus three pendant qubits per ring. Two cells give the 27-qubit
    /// heavy-hex layout.
    HeavyHex(usize),
}

/// Log-normal spread around per-kind means plus a Bernoulli outlier layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLaw {
    pub mean_readout: f64,
    pub mean_sx: f64,
    pub mean_cx: f64,
    /// Standard deviation of the log-rate; deviates are truncated to ±2σ.
    pub spread: f64,
    pub outlier_fraction: f64,
    pub outlier_multiplier: f64,
}

impl Default for NoiseLaw {
    fn default() -> Self {
        NoiseLaw {
            mean_readout: 0.02,
            mean_sx: 3e-4,
            mean_cx: 0.01,
            spread: 0.2,
            outlier_fraction: 0.1,
            outlier_multiplier: 5.0,
        }
    }
}

impl NoiseLaw {
    fn validate(&self) -> Result<(), CalibrationError> {
        let bad = |m: &str| Err(CalibrationError::InvalidParameter(m.to_string()));
        for (name, v) in [("mean_readout", self.mean_readout), ("mean_sx", self.mean_sx), ("mean_cx", self.mean_cx)] {
            if !(v.is_finite() && v > 0.0 && v <= 1.0) {
                return bad(&format!("{name} must lie in (0, 1]"));
            }
        }
        if !(self.spread.is_finite() && self.spread >= 0.0) {
            return bad("spread must be non-negative");
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return bad("outlier_fraction must lie in [0, 1)");
        }
        if !(self.outlier_multiplier.is_finite() && self.outlier_multiplier > 0.0) {
            return bad("outlier_multiplier must be positive");
        }
        Ok(())
    }
}

fn heavy_hex(cells: usize) -> CouplingMap {
    let mut edges = Vec::new();
    let mut next = 0usize;
    let mut prev_ring: Option<[usize; 12]> = None;
    for _ in 0..cells {
        let mut ring = [usize::MAX; 12];
        if let Some(p) = prev_ring {
            ring[11] = p[3];
            ring[10] = p[4];
            ring[9] = p[5];
        }
        for slot in ring.iter_mut() {
            if *slot == usize::MAX {
                *slot = next;
                next += 1;
            }
        }
        for i in 0..12 {
            let (a, b) = (ring[i], ring[(i + 1) % 12]);
            if prev_ring.is_some() && (9..11).contains(&i) {
                continue;
            }
            edges.push((a, b));
        }
        for pos in [0, 2, 7] {
            edges.push((ring[pos], next));
            next += 1;
        }
        prev_ring = Some(ring);
    }
    CouplingMap::new(next, edges)
}

pub fn coupling_for(kind: TopologyKind) -> Result<CouplingMap, CalibrationError> {
    let bad = |m: &str| Err(CalibrationError::InvalidParameter(m.to_string()));
    Ok(match kind {
        TopologyKind::Line(n) => {
            if n == 0 {
                return bad("line needs at least one qubit");
            }
            CouplingMap::new(n, (1..n).map(|i| (i - 1, i)))
        }
        TopologyKind::Grid { rows, cols } => {
            if rows == 0 || cols == 0 {
                return bad("grid dimensions must be positive");
            }
            let id = |r: usize, c: usize| r * cols + c;
            let mut e = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        e.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        e.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            CouplingMap::new(rows * cols, e)
        }
        TopologyKind::HeavyHex(cells) => {
            if cells == 0 {
                return bad("heavy_hex needs at least one cell");
            }
            heavy_hex(cells)
        }
    })
}

/// Deterministic synthetic calibration for `kind` under `law`.
pub fn gen_topology(kind: TopologyKind, seed: u64, law: &NoiseLaw) -> Result<CalibrationSnapshot, CalibrationError> {
    law.validate()?;
    let coupling = coupling_for(kind)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |mean: f64, rng: &mut ChaCha8Rng| -> f64 {
        let z: f64 = rng.sample::<f64, _>(StandardNormal).clamp(-2.0, 2.0);
        (mean * (law.spread * z).exp()).clamp(0.0, 1.0)
    };
    let n = coupling.num_qubits;
    let mut readout = Vec::with_capacity(n);
    let mut sx = Vec::with_capacity(n);
    for _ in 0..n {
        let mut r = draw(law.mean_readout, &mut rng);
        let mut s = draw(law.mean_sx, &mut rng);
        if rng.gen_bool(law.outlier_fraction) {
            r = (r * law.outlier_multiplier).clamp(0.0, 1.0);
            s = (s * law.outlier_multiplier).clamp(0.0, 1.0);
        }
        readout.push(r);
        sx.push(s);
    }
    let mut cx = std::collections::BTreeMap::new();
    for &e in &coupling.edges {
        let mut x = draw(law.mean_cx, &mut rng);
        if rng.gen_bool(law.outlier_fraction) {
            x = (x * law.outlier_multiplier).clamp(0.0, 1.0);
        }
        cx.insert(e, x);
    }
    let label = match kind {
        TopologyKind::Line(n) => format!("synthetic-line{n}-seed{seed}"),
        TopologyKind::Grid { rows, cols } => format!("synthetic-grid{rows}x{cols}-seed{seed}"),
        TopologyKind::HeavyHex(c) => format!("synthetic-heavyhex{c}-seed{seed}"),
    };
    CalibrationSnapshot::new(coupling, NoiseProfile { readout_error: readout, sx_error: sx, cx_error: cx }, label)
}
