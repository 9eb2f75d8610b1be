//! Placement, routing and layout scores (lower is better).

mod route;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, GateKind};
use crate::hardware::NoiseProfile;
use crate::puncture::Component;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("gate {gate} acts on {what}, which has no calibration entry")]
    Unmapped { gate: usize, what: String },
    #[error("no placements given")]
    Empty,
    #[error("total qubit count must be positive")]
    ZeroQubits,
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("a coordinate has zero variance")]
    DegenerateVariance,
    #[error("initial mapping is not an injective map into the component")]
    BadMapping,
    #[error("component cannot connect the required qubits")]
    Unroutable,
}

/// A circuit placed and routed on physical qubits.
///
/// `routed` acts on local indices `0..physical.len()`; local `i` runs on
/// physical qubit `physical[i]`. Logical qubit `l` starts on local
/// `initial_map[l]` and ends on `final_map[l]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub component_id: usize,
    pub physical: Vec<usize>,
    pub initial_map: Vec<usize>,
    pub final_map: Vec<usize>,
    pub routed: Circuit,
}

impl Layout {
    /// Identity placement without routing.
    pub fn trivial(c: &Circuit) -> Layout {
        let n = c.num_qubits();
        Layout {
            component_id: 0,
            physical: (0..n).collect(),
            initial_map: (0..n).collect(),
            final_map: (0..n).collect(),
            routed: c.clone(),
        }
    }

    /// Physical qubit each logical qubit starts on.
    pub fn mapping(&self) -> Vec<usize> {
        self.initial_map.iter().map(|&i| self.physical[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPlacement {
    pub layout: Layout,
    pub score: f64,
    pub width: usize,
}

/// `1 − Π(1 − ε)` over every operation of `routed`, with readout counted once
/// per measured qubit. Non-native two-qubit gates are charged as their CX
/// decompositions (RZZ: 2 CX + 1q, CZ: CX + 2×1q, SWAP: 3 CX).
pub fn layout_score(routed: &Circuit, layout: &Layout, noise: &NoiseProfile) -> Result<f64, LayoutError> {
    let phys = |q: usize, t: usize| -> Result<usize, LayoutError> {
        match layout.physical.get(q) {
            Some(&p) if p < noise.readout_error.len() => Ok(p),
            _ => Err(LayoutError::Unmapped { gate: t, what: format!("qubit {q}") }),
        }
    };
    let mut keep = 1.0f64;
    let mut measured = BTreeSet::new();
    for (t, g) in routed.gates().iter().enumerate() {
        let q = g.qubits();
        match g.kind() {
            GateKind::Barrier => {}
            GateKind::Measure => {
                measured.insert(phys(q[0], t)?);
            }
            k if k.is_two_qubit() => {
                let (a, b) = (phys(q[0], t)?, phys(q[1], t)?);
                let e = noise
                    .edge_error(a, b)
                    .ok_or_else(|| LayoutError::Unmapped { gate: t, what: format!("edge ({a}, {b})") })?;
                let (cx, one_q) = match k {
                    GateKind::Cx => (1, None),
                    GateKind::Rzz => (2, Some((b, 1))),
                    GateKind::Cz => (1, Some((b, 2))),
                    _ => (3, None),
                };
                keep *= (1.0 - e).powi(cx);
                if let Some((p, times)) = one_q {
                    keep *= (1.0 - noise.sx_error[p]).powi(times);
                }
            }
            _ => keep *= 1.0 - noise.sx_error[phys(q[0], t)?],
        }
    }
    for p in measured {
        keep *= 1.0 - noise.readout_error[p];
    }
    Ok((1.0 - keep).clamp(0.0, 1.0))
}

/// Best placement of `c` on `comp`, or `None` if it does not fit.
///
/// Every component vertex is tried as the anchor for both the highest- and
/// the lowest-degree logical qubit; ties keep the first candidate found.
pub fn place_and_route(c: &Circuit, comp: &Component, noise: &NoiseProfile) -> Option<ScoredPlacement> {
    if c.num_qubits() > comp.size {
        return None;
    }
    let mut best: Option<ScoredPlacement> = None;
    for layout in route::candidate_layouts(c, comp, noise) {
        let Ok(score) = layout_score(&layout.routed, &layout, noise) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| score < b.score) {
            best = Some(ScoredPlacement { layout, score, width: c.num_qubits() });
        }
    }
    best
}

/// Scores of every candidate placement of `c` on `comp`, in search order.
pub fn candidate_scores(c: &Circuit, comp: &Component, noise: &NoiseProfile) -> Vec<f64> {
    if c.num_qubits() > comp.size {
        return Vec::new();
    }
    route::candidate_layouts(c, comp, noise).iter().filter_map(|l| layout_score(&l.routed, l, noise).ok()).collect()
}

/// Route `c` from a given start mapping (logical → physical) on `comp`.
pub fn route_fixed(
    c: &Circuit,
    comp: &Component,
    noise: &NoiseProfile,
    initial: &[usize],
) -> Result<Layout, LayoutError> {
    let distinct: BTreeSet<usize> = initial.iter().copied().collect();
    if initial.len() != c.num_qubits() || distinct.len() != initial.len() || !distinct.is_subset(&comp.qubits) {
        return Err(LayoutError::BadMapping);
    }
    let g = route::Graph::new(&comp.qubits, &comp.edges, noise);
    route::route_with(&g, c, comp.id, initial).ok_or(LayoutError::Unroutable)
}

/// `W_s = (1/n) Σ n_i s_i` over `(n_i, s_i)` pairs.
pub fn weighted_score(items: &[(usize, f64)], n: usize) -> Result<f64, LayoutError> {
    if items.is_empty() {
        return Err(LayoutError::Empty);
    }
    if n == 0 {
        return Err(LayoutError::ZeroQubits);
    }
    Ok(items.iter().map(|&(w, s)| w as f64 * s).sum::<f64>() / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveInputs {
    /// `(n_i, s_i)` per placement.
    pub placements: Vec<(usize, f64)>,
    pub n: usize,
    pub alpha: f64,
}

/// `α·W_s + (1−α)·(1/S)·Σ_i (W_s − n_i s_i)²`.
pub fn full_objective(inp: &ObjectiveInputs) -> Result<f64, LayoutError> {
    if !(0.0..=1.0).contains(&inp.alpha) {
        return Err(LayoutError::InvalidAlpha(inp.alpha));
    }
    let ws = weighted_score(&inp.placements, inp.n)?;
    let s = inp.placements.len() as f64;
    let spread: f64 = inp.placements.iter().map(|&(w, x)| (ws - w as f64 * x).powi(2)).sum::<f64>() / s;
    Ok(inp.alpha * ws + (1.0 - inp.alpha) * spread)
}

/// Pearson correlation coefficient.
pub fn norm_correlation(samples: &[(f64, f64)]) -> Result<f64, LayoutError> {
    if samples.len() < 2 {
        return Err(LayoutError::TooFewSamples(samples.len()));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in samples {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(LayoutError::DegenerateVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
