//! Coupling maps, calibration data and the calibration JSON format.
//!
//! Calibration files look like:
//!
//! ```json
//! {
//!   "schema": 1,
//!   "timestamp": "2024-01-01T00:00:00Z",
//!   "num_qubits": 2,
//!   "qubits": [{"id": 0, "readout_error": 0.02, "sx_error": 0.0003},
//!              {"id": 1, "readout_error": 0.03, "sx_error": 0.0004}],
//!   "edges":  [{"q0": 0, "q1": 1, "cx_error": 0.01}]
//! }
//! ```
//!
//! Every qubit `0..num_qubits` and every edge needs an entry, all rates lie in
//! `[0, 1]` and the coupling map must be connected.

pub mod topology;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use topology::{gen_topology, NoiseLaw, TopologyKind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("cannot read calibration file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed calibration JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("rate out of range: {what} = {value}")]
    RateOutOfRange { what: String, value: f64 },
    #[error("coupling map is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Normalised undirected edge `(min, max)`.
pub type Edge = (usize, usize);

pub fn edge(a: usize, b: usize) -> Edge {
    (a.min(b), a.max(b))
}

/// Physical-qubit connectivity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingMap {
    pub num_qubits: usize,
    pub edges: BTreeSet<Edge>,
}

impl CouplingMap {
    pub fn new(num_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> CouplingMap {
        CouplingMap { num_qubits, edges: edges.into_iter().map(|(a, b)| edge(a, b)).collect() }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&edge(a, b))
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_qubits];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Connected components of the qubits in `within`, using only edges whose
    /// endpoints both lie in `within`. Components are sorted by smallest member.
    pub fn components_within(&self, within: &BTreeSet<usize>, edges: &BTreeSet<Edge>) -> Vec<BTreeSet<usize>> {
        let mut adj: BTreeMap<usize, Vec<usize>> = within.iter().map(|&q| (q, Vec::new())).collect();
        for &(a, b) in edges {
            if within.contains(&a) && within.contains(&b) {
                adj.get_mut(&a).unwrap().push(b);
                adj.get_mut(&b).unwrap().push(a);
            }
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in within {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[&u] {
                    if seen.insert(v) {
                        comp.insert(v);
                        queue.push_back(v);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn components(&self) -> Vec<BTreeSet<usize>> {
        let all: BTreeSet<usize> = (0..self.num_qubits).collect();
        self.components_within(&all, &self.edges)
    }

    pub fn is_connected(&self) -> bool {
        self.num_qubits > 0 && self.components().len() == 1
    }
}

/// Per-qubit and per-edge calibrated error rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    pub readout_error: Vec<f64>,
    pub sx_error: Vec<f64>,
    pub cx_error: BTreeMap<Edge, f64>,
}

impl NoiseProfile {
    /// Uniform rates on every qubit and edge of `map`.
    pub fn uniform(map: &CouplingMap, readout: f64, sx: f64, cx: f64) -> NoiseProfile {
        NoiseProfile {
            readout_error: vec![readout; map.num_qubits],
            sx_error: vec![sx; map.num_qubits],
            cx_error: map.edges.iter().map(|&e| (e, cx)).collect(),
        }
    }

    pub fn edge_error(&self, a: usize, b: usize) -> Option<f64> {
        self.cx_error.get(&edge(a, b)).copied()
    }

    /// Scalar used to rank qubits against each other: probability that a
    /// single-qubit gate followed by a readout goes wrong.
    pub fn qubit_error(&self, q: usize) -> f64 {
        1.0 - (1.0 - self.readout_error[q]) * (1.0 - self.sx_error[q])
    }

    /// Every rate multiplied by `factor` and clipped to `[0, 1]`.
    pub fn scaled(&self, factor: f64) -> NoiseProfile {
        let s = |x: f64| (x * factor).clamp(0.0, 1.0);
        NoiseProfile {
            readout_error: self.readout_error.iter().map(|&x| s(x)).collect(),
            sx_error: self.sx_error.iter().map(|&x| s(x)).collect(),
            cx_error: self.cx_error.iter().map(|(&e, &x)| (e, s(x))).collect(),
        }
    }
}

/// A coupling map together with its noise profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSnapshot {
    pub coupling: CouplingMap,
    pub noise: NoiseProfile,
    pub timestamp: String,
}

#[derive(Serialize, Deserialize)]
struct RawQubit {
    id: Option<usize>,
    readout_error: Option<f64>,
    sx_error: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawEdge {
    q0: Option<usize>,
    q1: Option<usize>,
    cx_error: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawCalibration {
    schema: Option<u32>,
    #[serde(default)]
    timestamp: Option<String>,
    num_qubits: Option<usize>,
    qubits: Option<Vec<RawQubit>>,
    edges: Option<Vec<RawEdge>>,
}

fn check_rate(what: impl Fn() -> String, value: f64) -> Result<f64, CalibrationError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(CalibrationError::RateOutOfRange { what: what(), value })
    }
}

impl CalibrationSnapshot {
    /// Build and validate a snapshot.
    pub fn new(
        coupling: CouplingMap,
        noise: NoiseProfile,
        timestamp: impl Into<String>,
    ) -> Result<Self, CalibrationError> {
        let snap = CalibrationSnapshot { coupling, noise, timestamp: timestamp.into() };
        snap.validate()?;
        Ok(snap)
    }

    pub fn num_qubits(&self) -> usize {
        self.coupling.num_qubits
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        let n = self.coupling.num_qubits;
        if n == 0 {
            return Err(CalibrationError::Schema("num_qubits must be at least 1".into()));
        }
        if self.noise.readout_error.len() != n || self.noise.sx_error.len() != n {
            return Err(CalibrationError::Schema("qubit rate tables do not cover every qubit".into()));
        }
        for q in 0..n {
            check_rate(|| format!("qubit {q} readout_error"), self.noise.readout_error[q])?;
            check_rate(|| format!("qubit {q} sx_error"), self.noise.sx_error[q])?;
        }
        for &(a, b) in &self.coupling.edges {
            if a == b {
                return Err(CalibrationError::Schema(format!("self-loop edge ({a},{b})")));
            }
            if b >= n {
                return Err(CalibrationError::Schema(format!("edge ({a},{b}) references qubit {b} >= {n}")));
            }
            let e = self
                .noise
                .cx_error
                .get(&(a, b))
                .ok_or_else(|| CalibrationError::Schema(format!("edge ({a},{b}) has no cx_error")))?;
            check_rate(|| format!("edge ({a},{b}) cx_error"), *e)?;
        }
        if let Some(&(a, b)) = self.noise.cx_error.keys().find(|e| !self.coupling.edges.contains(e)) {
            return Err(CalibrationError::Schema(format!("cx_error given for non-edge ({a},{b})")));
        }
        let comps = self.coupling.components().len();
        if comps != 1 {
            return Err(CalibrationError::Disconnected { components: comps });
        }
        Ok(())
    }

    /// Parse and validate calibration JSON text.
    pub fn from_json(text: &str) -> Result<Self, CalibrationError> {
        let raw: RawCalibration = serde_json::from_str(text)?;
        let schema = raw.schema.ok_or_else(|| CalibrationError::Schema("missing field `schema`".into()))?;
        if schema != SCHEMA_VERSION {
            return Err(CalibrationError::Schema(format!(
                "unsupported schema version {schema}, expected {SCHEMA_VERSION}"
            )));
        }
        let n = raw.num_qubits.ok_or_else(|| CalibrationError::Schema("missing field `num_qubits`".into()))?;
        if n == 0 || n > 1 << 20 {
            return Err(CalibrationError::Schema(format!("num_qubits {n} out of bounds")));
        }
        let qubits = raw.qubits.ok_or_else(|| CalibrationError::Schema("missing field `qubits`".into()))?;
        let edges = raw.edges.ok_or_else(|| CalibrationError::Schema("missing field `edges`".into()))?;
        let mut readout = vec![None; n];
        let mut sx = vec![None; n];
        for (i, q) in qubits.iter().enumerate() {
            let id = q.id.ok_or_else(|| CalibrationError::Schema(format!("qubits[{i}]: missing field `id`")))?;
            if id >= n {
                return Err(CalibrationError::Schema(format!("qubits[{i}]: id {id} >= num_qubits {n}")));
            }
            if readout[id].is_some() {
                return Err(CalibrationError::Schema(format!("qubit {id} listed twice")));
            }
            let r = q
                .readout_error
                .ok_or_else(|| CalibrationError::Schema(format!("qubit {id}: missing field `readout_error`")))?;
            let s =
                q.sx_error.ok_or_else(|| CalibrationError::Schema(format!("qubit {id}: missing field `sx_error`")))?;
            readout[id] = Some(check_rate(|| format!("qubit {id} readout_error"), r)?);
            sx[id] = Some(check_rate(|| format!("qubit {id} sx_error"), s)?);
        }
        if let Some(missing) = readout.iter().position(|r| r.is_none()) {
            return Err(CalibrationError::Schema(format!("qubit {missing} has no entry")));
        }
        let mut coupling = BTreeSet::new();
        let mut cx = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            let (a, b) = match (e.q0, e.q1) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(CalibrationError::Schema(format!("edges[{i}]: missing field `q0` or `q1`"))),
            };
            if a == b {
                return Err(CalibrationError::Schema(format!("edges[{i}]: self-loop on qubit {a}")));
            }
            if a.max(b) >= n {
                return Err(CalibrationError::Schema(format!(
                    "edge ({a},{b}) references qubit {} >= num_qubits {n}",
                    a.max(b)
                )));
            }
            let rate = e
                .cx_error
                .ok_or_else(|| CalibrationError::Schema(format!("edge ({a},{b}): missing field `cx_error`")))?;
            let key = edge(a, b);
            if !coupling.insert(key) {
                return Err(CalibrationError::Schema(format!("edge ({a},{b}) listed twice")));
            }
            cx.insert(key, check_rate(|| format!("edge ({a},{b}) cx_error"), rate)?);
        }
        CalibrationSnapshot::new(
            CouplingMap { num_qubits: n, edges: coupling },
            NoiseProfile {
                readout_error: readout.into_iter().map(Option::unwrap).collect(),
                sx_error: sx.into_iter().map(Option::unwrap).collect(),
                cx_error: cx,
            },
            raw.timestamp.unwrap_or_default(),
        )
    }

    pub fn to_json(&self) -> String {
        let raw = RawCalibration {
            schema: Some(SCHEMA_VERSION),
            timestamp: Some(self.timestamp.clone()),
            num_qubits: Some(self.coupling.num_qubits),
            qubits: Some(
                (0..self.coupling.num_qubits)
                    .map(|q| RawQubit {
                        id: Some(q),
                        readout_error: Some(self.noise.readout_error[q]),
                        sx_error: Some(self.noise.sx_error[q]),
                    })
                    .collect(),
            ),
            edges: Some(
                self.noise
                    .cx_error
                    .iter()
                    .map(|(&(a, b), &e)| RawEdge { q0: Some(a), q1: Some(b), cx_error: Some(e) })
                    .collect(),
            ),
        };
        serde_json::to_string_pretty(&raw).expect("calibration serialises")
    }

    /// Same map with every rate scaled by `factor` (clipped to `[0, 1]`).
    pub fn scaled(&self, factor: f64) -> CalibrationSnapshot {
        CalibrationSnapshot {
            coupling: self.coupling.clone(),
            noise: self.noise.scaled(factor),
            timestamp: self.timestamp.clone(),
        }
    }
}

/// Read and validate a calibration file.
pub fn load_calibration(path: impl AsRef<Path>) -> Result<CalibrationSnapshot, CalibrationError> {
    let text = std::fs::read_to_string(path)?;
    CalibrationSnapshot::from_json(&text)
}
