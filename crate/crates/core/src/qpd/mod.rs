//! Quasi-probability decompositions of cut gates and cut wires.
//!
//! Each term is a pair of local operation sequences. `GateKind::Measure`
//! inside a sequence is a Z-basis measurement whose ±1 outcome multiplies
//! the term's contribution (for wire cuts only when the term is `signed`).

pub mod subexperiment;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Gate, GateKind};
use crate::cut::CutSide;

pub use subexperiment::{
    execute_exact, execute_noisy, generate_subexperiments, reconstruct, Combo, Estimate, ObservableTerm,
    ReconstructionResult, SubexperimentError, SubexperimentSet, Variant, VariantResults,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpdError {
    #[error("gate {0} cannot be gate-cut (supported: cx, cz, rzz)")]
    UnsupportedGate(GateKind),
}

/// One term of a two-qubit gate decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCutTerm {
    pub coefficient: f64,
    /// Operations on the first operand.
    pub left: Vec<GateKind>,
    /// Operations on the second operand.
    pub right: Vec<GateKind>,
}

/// One measure-and-prepare term of the identity-channel decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireCutTerm {
    pub coefficient: f64,
    /// Basis change followed by a Z measurement.
    pub measure: Vec<GateKind>,
    /// Whether the measured outcome multiplies the term.
    pub signed: bool,
    /// Preparation applied to a fresh `|0⟩`.
    pub prepare: Vec<GateKind>,
}

/// Terms for `exp(iφ Z⊗Z)`: `c²·[I⊗I] + s²·[Z⊗Z] + cs·(M⊗[Sdg] − M⊗[S] + [Sdg]⊗M − [S]⊗M)`
/// with `c = cos φ`, `s = sin φ`.
fn zz_terms(phi: f64) -> Vec<GateCutTerm> {
    use GateKind::*;
    let (s, c) = phi.sin_cos();
    let t = |coefficient: f64, left: &[GateKind], right: &[GateKind]| GateCutTerm {
        coefficient,
        left: left.to_vec(),
        right: right.to_vec(),
    };
    vec![
        t(c * c, &[], &[]),
        t(s * s, &[Z], &[Z]),
        t(c * s, &[Measure], &[Sdg]),
        t(-c * s, &[Measure], &[S]),
        t(c * s, &[Sdg], &[Measure]),
        t(-c * s, &[S], &[Measure]),
    ]
}

/// Product of single-qubit phase gates, reduced modulo global phase.
fn simplify(ops: Vec<GateKind>) -> Vec<GateKind> {
    use GateKind::*;
    let mut out: Vec<GateKind> = Vec::new();
    for op in ops {
        match (out.last().copied(), op) {
            (Some(H), H) => {
                out.pop();
            }
            (Some(S), Sdg) | (Some(Sdg), S) | (Some(Z), Z) => {
                out.pop();
            }
            (Some(S), S) | (Some(Sdg), Sdg) => {
                out.pop();
                out.push(Z);
            }
            (Some(Z), S) | (Some(S), Z) => {
                out.pop();
                out.push(Sdg);
            }
            (Some(Z), Sdg) | (Some(Sdg), Z) => {
                out.pop();
                out.push(S);
            }
            // Phase gates after a Z measurement act trivially on the
            // post-measurement state.
            (Some(Measure), S | Sdg | Z) => {}
            _ => out.push(op),
        }
    }
    if out.len() == 3 && out[0] == H && out[2] == H {
        match out[1] {
            Z => return vec![X],
            _ => return out,
        }
    }
    out
}

/// Decompose a CX, CZ or RZZ gate into local terms.
pub fn decompose_gate_cut(g: &Gate) -> Result<Vec<GateCutTerm>, QpdError> {
    use GateKind::*;
    match g.kind() {
        Rzz => Ok(zz_terms(-g.angle().expect("rzz has an angle") / 2.0)),
        Cz => Ok(cz_terms()),
        Cx => Ok(cz_terms()
            .into_iter()
            .map(|t| {
                let mut r = vec![H];
                r.extend(t.right);
                r.push(H);
                GateCutTerm { coefficient: t.coefficient, left: t.left, right: simplify(r) }
            })
            .collect()),
        k => Err(QpdError::UnsupportedGate(k)),
    }
}

/// `CZ ∝ (S⊗S)·exp(iπ/4 Z⊗Z)`.
fn cz_terms() -> Vec<GateCutTerm> {
    use GateKind::*;
    zz_terms(std::f64::consts::FRAC_PI_4)
        .into_iter()
        .map(|t| {
            let mut l = t.left;
            l.push(S);
            let mut r = t.right;
            r.push(S);
            GateCutTerm { coefficient: t.coefficient, left: simplify(l), right: simplify(r) }
        })
        .collect()
}

/// Eight measure-and-prepare terms with `Σ|c| = 4`.
pub fn decompose_wire_cut() -> Vec<WireCutTerm> {
    use GateKind::*;
    let t = |coefficient: f64, measure: &[GateKind], signed: bool, prepare: &[GateKind]| WireCutTerm {
        coefficient,
        measure: measure.to_vec(),
        signed,
        prepare: prepare.to_vec(),
    };
    vec![
        t(0.5, &[Measure], false, &[]),
        t(0.5, &[Measure], false, &[X]),
        t(0.5, &[H, Measure], true, &[H]),
        t(-0.5, &[H, Measure], true, &[X, H]),
        t(0.5, &[Sdg, H, Measure], true, &[H, S]),
        t(-0.5, &[Sdg, H, Measure], true, &[H, Sdg]),
        t(0.5, &[Measure], true, &[]),
        t(-0.5, &[Measure], true, &[X]),
    ]
}

pub fn one_norm_gate(terms: &[GateCutTerm]) -> f64 {
    terms.iter().map(|t| t.coefficient.abs()).sum()
}

pub fn one_norm_wire(terms: &[WireCutTerm]) -> f64 {
    terms.iter().map(|t| t.coefficient.abs()).sum()
}

/// Distinct local circuits one side of a cut gate of this kind needs.
pub fn gate_side_variant_count(kind: GateKind, side: CutSide) -> usize {
    let g = match kind {
        GateKind::Rzz => Gate::rzz(std::f64::consts::FRAC_PI_2, 0, 1),
        k if k.is_two_qubit() => Gate::pair(k, 0, 1),
        _ => return 1,
    };
    let Ok(terms) = decompose_gate_cut(&g) else {
        return 1;
    };
    let set: BTreeSet<&Vec<GateKind>> =
        terms.iter().map(|t| if side == CutSide::Right { &t.right } else { &t.left }).collect();
    set.len()
}

/// Distinct local circuits one side of a wire cut needs.
pub fn wire_side_variant_count(side: CutSide) -> usize {
    let terms = decompose_wire_cut();
    let set: BTreeSet<&Vec<GateKind>> =
        terms.iter().map(|t| if side == CutSide::Upstream { &t.measure } else { &t.prepare }).collect();
    set.len()
}
