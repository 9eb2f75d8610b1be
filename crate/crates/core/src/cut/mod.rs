//! Gate and wire cutting: strategy model, search and exhaustive oracle.
//!
//! Cutting works on the CX-level view of a circuit produced by
//! [`lower_for_cutting`]: `RZZ(θ)` becomes `CX·RZ(θ)·CX`, `SWAP` becomes three
//! CX gates, and barriers and measurements are dropped. Action indices in a
//! [`CutStrategy`] always refer to that lowered circuit, which the strategy
//! carries.
//!
//! A wire cut splits a qubit wire into segments. Segments joined by uncut
//! two-qubit gates form a subcircuit, whose width is its segment count.

pub mod oracle;
pub mod search;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Gate, GateKind};

pub use oracle::{oracle_min_cuts, OracleConfig, OracleError};
pub use search::{find_cuts, find_cuts_with, SearchConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutError {
    #[error("gate index {0} is out of range")]
    GateOutOfRange(usize),
    #[error("gate {0} is not a two-qubit gate and cannot be gate-cut")]
    NotTwoQubit(usize),
    #[error("wire cut on qubit {qubit} after gate {after_gate} does not lie between two gates on that wire")]
    BadWirePosition { qubit: usize, after_gate: usize },
    #[error("duplicate cut action {0:?}")]
    Duplicate(CutAction),
    #[error("subcircuit {subcircuit} has width {width}, exceeding the device constraint {d}")]
    TooWide { subcircuit: usize, width: usize, d: usize },
    #[error("device constraint must be at least 1")]
    ZeroConstraint,
    #[error("malformed strategy JSON: {0}")]
    Json(String),
}

/// One cut. Ordering puts all gate cuts before wire cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutAction {
    GateCut {
        gate: usize,
    },
    /// The wire of `qubit` is severed right after gate `after_gate`.
    WireCut {
        qubit: usize,
        after_gate: usize,
    },
}

impl CutAction {
    pub fn is_gate_cut(&self) -> bool {
        matches!(self, CutAction::GateCut { .. })
    }
}

/// Which side of a cut a subcircuit holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutSide {
    /// First operand of a cut gate.
    Left,
    /// Second operand of a cut gate.
    Right,
    /// Measure side of a wire cut.
    Upstream,
    /// Prepare side of a wire cut.
    Downstream,
}

/// A contiguous piece of one original wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub qubit: usize,
    /// Position along the wire, 0 for the first piece.
    pub index: usize,
    /// First and last gate (lowered-circuit indices) on this piece.
    pub first_gate: Option<usize>,
    pub last_gate: Option<usize>,
    pub subcircuit: usize,
    /// Qubit index inside the subcircuit fragment.
    pub local_qubit: usize,
    /// Begins with a wire-cut preparation.
    pub prepared: bool,
    /// Ends with a wire-cut measurement.
    pub measured_for_cut: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subcircuit {
    pub id: usize,
    pub width: usize,
    /// Indices into [`CutStrategy::segments`], ordered by local qubit.
    pub segments: Vec<usize>,
    pub incident_cuts: Vec<(CutAction, CutSide)>,
    /// Layout skeleton: uncut gates, a single-qubit stand-in for each gate-cut
    /// side, an `H` preparation per wire-cut downstream side and a
    /// measurement on every segment end.
    pub fragment: Circuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverheadReport {
    pub num_gate_cuts: usize,
    pub num_wire_cuts: usize,
    /// `3^g · 4^w`.
    pub gamma: f64,
    /// `9^g · 16^w`, saturating.
    pub canonical_executions: u128,
    /// Deduplicated variant circuits over all subcircuits.
    pub actual_subexperiments: u128,
}

/// `9^g · 16^w`, saturating at `u128::MAX`.
pub fn canonical_executions(g: usize, w: usize) -> u128 {
    let mut x: u128 = 1;
    for _ in 0..g {
        x = x.saturating_mul(9);
    }
    for _ in 0..w {
        x = x.saturating_mul(16);
    }
    x
}

pub fn gamma(g: usize, w: usize) -> f64 {
    3f64.powi(g as i32) * 4f64.powi(w as i32)
}

/// The equal-partition constraint `⌈n/2⌉`.
pub fn equal_partition_constraint(c: &Circuit) -> usize {
    c.num_qubits().div_ceil(2)
}

/// CX-level view used for cutting, simulation and routing.
pub fn lower_for_cutting(c: &Circuit) -> Circuit {
    let mut out = c.flat_map(|g| {
        let q = g.qubits();
        match g.kind() {
            GateKind::Rzz => vec![Gate::cx(q[0], q[1]), Gate::rz(g.angle().unwrap(), q[1]), Gate::cx(q[0], q[1])],
            GateKind::Swap => vec![Gate::cx(q[0], q[1]), Gate::cx(q[1], q[0]), Gate::cx(q[0], q[1])],
            GateKind::Barrier | GateKind::Measure => vec![],
            _ => vec![g.clone()],
        }
    });
    out.set_name(c.name().to_string());
    out
}

/// A validated set of cuts on a lowered circuit, with the induced partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutStrategy {
    pub device_constraint: usize,
    pub circuit: Circuit,
    pub actions: Vec<CutAction>,
    pub num_gate_cuts: usize,
    pub num_wire_cuts: usize,
    pub segments: Vec<Segment>,
    pub subcircuits: Vec<Subcircuit>,
}

#[derive(Deserialize)]
struct StrategyFile {
    device_constraint: usize,
    circuit: Circuit,
    actions: Vec<CutAction>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl CutStrategy {
    /// Validate `actions` against the lowered circuit `circuit` and build the
    /// partition. Fails if any subcircuit is wider than `d`.
    pub fn from_actions(circuit: Circuit, d: usize, actions: Vec<CutAction>) -> Result<CutStrategy, CutError> {
        if d == 0 {
            return Err(CutError::ZeroConstraint);
        }
        let gates = circuit.gates();
        let wires = circuit.wire_gates();
        let mut actions = actions;
        actions.sort();
        let mut gate_cuts = BTreeSet::new();
        let mut wire_cuts: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); circuit.num_qubits()];
        for (i, a) in actions.iter().enumerate() {
            if i > 0 && actions[i - 1] == *a {
                return Err(CutError::Duplicate(*a));
            }
            match *a {
                CutAction::GateCut { gate } => {
                    let g = gates.get(gate).ok_or(CutError::GateOutOfRange(gate))?;
                    if !g.is_two_qubit() {
                        return Err(CutError::NotTwoQubit(gate));
                    }
                    gate_cuts.insert(gate);
                }
                CutAction::WireCut { qubit, after_gate } => {
                    let bad = CutError::BadWirePosition { qubit, after_gate };
                    let wire = wires.get(qubit).ok_or(bad.clone())?;
                    match wire.iter().position(|&g| g == after_gate) {
                        Some(p) if p + 1 < wire.len() => {}
                        _ => return Err(bad),
                    }
                    wire_cuts[qubit].insert(after_gate);
                }
            }
        }

        // Segment ids per (qubit, piece).
        let mut seg_base = Vec::with_capacity(circuit.num_qubits());
        let mut total = 0;
        for cuts in &wire_cuts {
            seg_base.push(total);
            total += cuts.len() + 1;
        }
        let seg_of = |q: usize, gate: usize| seg_base[q] + wire_cuts[q].range(..gate).count();
        let mut uf = UnionFind::new(total);
        for (t, g) in gates.iter().enumerate() {
            if g.is_two_qubit() && !gate_cuts.contains(&t) {
                let q = g.qubits();
                uf.union(seg_of(q[0], t), seg_of(q[1], t));
            }
        }

        let mut segments = Vec::with_capacity(total);
        for (q, cuts) in wire_cuts.iter().enumerate() {
            for k in 0..=cuts.len() {
                let lo = if k == 0 { None } else { cuts.iter().nth(k - 1).copied() };
                let hi = cuts.iter().nth(k).copied();
                let on_seg: Vec<usize> = wires[q]
                    .iter()
                    .copied()
                    .filter(|&g| lo.is_none_or(|l| g > l) && hi.is_none_or(|h| g <= h))
                    .collect();
                segments.push(Segment {
                    qubit: q,
                    index: k,
                    first_gate: on_seg.first().copied(),
                    last_gate: on_seg.last().copied(),
                    subcircuit: usize::MAX,
                    local_qubit: usize::MAX,
                    prepared: k > 0,
                    measured_for_cut: k < cuts.len(),
                });
            }
        }

        // Subcircuits in order of their first segment.
        let mut root_to_sub: BTreeMap<usize, usize> = BTreeMap::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for s in 0..total {
            let r = uf.find(s);
            let id = *root_to_sub.entry(r).or_insert_with(|| {
                members.push(Vec::new());
                members.len() - 1
            });
            members[id].push(s);
        }
        for (id, segs) in members.iter().enumerate() {
            if segs.len() > d {
                return Err(CutError::TooWide { subcircuit: id, width: segs.len(), d });
            }
            for (local, &s) in segs.iter().enumerate() {
                segments[s].subcircuit = id;
                segments[s].local_qubit = local;
            }
        }

        let mut incident: Vec<Vec<(CutAction, CutSide)>> = vec![Vec::new(); members.len()];
        for a in &actions {
            match *a {
                CutAction::GateCut { gate } => {
                    let q = gates[gate].qubits();
                    incident[segments[seg_of(q[0], gate)].subcircuit].push((*a, CutSide::Left));
                    incident[segments[seg_of(q[1], gate)].subcircuit].push((*a, CutSide::Right));
                }
                CutAction::WireCut { qubit, after_gate } => {
                    let up = seg_of(qubit, after_gate);
                    incident[segments[up].subcircuit].push((*a, CutSide::Upstream));
                    incident[segments[up + 1].subcircuit].push((*a, CutSide::Downstream));
                }
            }
        }

        // Layout skeletons.
        let mut fragments: Vec<Circuit> = members
            .iter()
            .enumerate()
            .map(|(i, segs)| Circuit::new(format!("{}_sub{i}", circuit.name()), segs.len()))
            .collect();
        let local = |s: usize| segments[s].local_qubit;
        for s in 0..total {
            if segments[s].prepared && segments[s].first_gate.is_none() {
                fragments[segments[s].subcircuit].push_unchecked(Gate::single(GateKind::H, local(s)));
            }
        }
        for (t, g) in gates.iter().enumerate() {
            let q = g.qubits();
            for &qq in q {
                let s = seg_of(qq, t);
                if segments[s].prepared && segments[s].first_gate == Some(t) {
                    fragments[segments[s].subcircuit].push_unchecked(Gate::single(GateKind::H, local(s)));
                }
            }
            if g.is_two_qubit() {
                let (sa, sb) = (seg_of(q[0], t), seg_of(q[1], t));
                if gate_cuts.contains(&t) {
                    fragments[segments[sa].subcircuit].push_unchecked(Gate::single(GateKind::S, local(sa)));
                    fragments[segments[sb].subcircuit].push_unchecked(Gate::single(GateKind::S, local(sb)));
                } else {
                    let sub = segments[sa].subcircuit;
                    fragments[sub].push_unchecked(g.remapped(|x| local(seg_of(x, t))));
                }
            } else {
                let s = seg_of(q[0], t);
                fragments[segments[s].subcircuit].push_unchecked(g.remapped(|_| local(s)));
            }
            for &qq in q {
                let s = seg_of(qq, t);
                if segments[s].measured_for_cut && segments[s].last_gate == Some(t) {
                    fragments[segments[s].subcircuit].push_unchecked(Gate::measure(local(s)));
                }
            }
        }
        for s in 0..total {
            if !segments[s].measured_for_cut {
                fragments[segments[s].subcircuit].push_unchecked(Gate::measure(local(s)));
            }
        }

        let subcircuits = members
            .into_iter()
            .zip(incident)
            .zip(fragments)
            .enumerate()
            .map(|(id, ((segs, incident_cuts), fragment))| Subcircuit {
                id,
                width: segs.len(),
                segments: segs,
                incident_cuts,
                fragment,
            })
            .collect();
        let num_gate_cuts = gate_cuts.len();
        let num_wire_cuts = actions.len() - num_gate_cuts;
        Ok(CutStrategy { device_constraint: d, circuit, actions, num_gate_cuts, num_wire_cuts, segments, subcircuits })
    }

    /// The uncut strategy for a lowered circuit.
    pub fn uncut(circuit: Circuit, d: usize) -> Result<CutStrategy, CutError> {
        CutStrategy::from_actions(circuit, d, Vec::new())
    }

    pub fn num_cuts(&self) -> usize {
        self.actions.len()
    }

    pub fn canonical_executions(&self) -> u128 {
        canonical_executions(self.num_gate_cuts, self.num_wire_cuts)
    }

    /// Natural log of the canonical execution count.
    pub fn log_cost(&self) -> f64 {
        search::Cost::new(self.num_gate_cuts, self.num_wire_cuts).log()
    }

    pub fn widths(&self) -> Vec<usize> {
        self.subcircuits.iter().map(|s| s.width).collect()
    }

    /// Total segment count, `n + w`.
    pub fn total_width(&self) -> usize {
        self.segments.len()
    }

    /// Segment holding the end of each original wire.
    pub fn final_segment(&self, qubit: usize) -> usize {
        self.segments.iter().rposition(|s| s.qubit == qubit).expect("every qubit has a segment")
    }

    pub fn overhead(&self) -> OverheadReport {
        overhead(self)
    }

    /// Serialise the inputs needed to rebuild the strategy.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("strategy serialises")
    }

    /// Rebuild from JSON written by [`CutStrategy::to_json`] (only
    /// `device_constraint`, `circuit` and `actions` are read; the partition is
    /// recomputed and validated).
    pub fn from_json(text: &str) -> Result<CutStrategy, CutError> {
        let f: StrategyFile = serde_json::from_str(text).map_err(|e| CutError::Json(e.to_string()))?;
        CutStrategy::from_actions(f.circuit, f.device_constraint, f.actions)
    }
}

pub fn overhead(s: &CutStrategy) -> OverheadReport {
    let actual = s
        .subcircuits
        .iter()
        .map(|sub| {
            sub.incident_cuts.iter().fold(1u128, |acc, (a, side)| {
                let k = match a {
                    CutAction::GateCut { gate } => {
                        crate::qpd::gate_side_variant_count(s.circuit.gates()[*gate].kind(), *side)
                    }
                    CutAction::WireCut { .. } => crate::qpd::wire_side_variant_count(*side),
                };
                acc.saturating_mul(k as u128)
            })
        })
        .fold(0u128, |a, b| a.saturating_add(b));
    OverheadReport {
        num_gate_cuts: s.num_gate_cuts,
        num_wire_cuts: s.num_wire_cuts,
        gamma: gamma(s.num_gate_cuts, s.num_wire_cuts),
        canonical_executions: s.canonical_executions(),
        actual_subexperiments: actual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::generators::gen_ising_1d;

    fn bell() -> Circuit {
        Circuit::from_gates("bell", 2, vec![Gate::single(GateKind::H, 0), Gate::cx(0, 1)]).unwrap()
    }

    #[test]
    fn overhead_arithmetic() {
        assert_eq!(canonical_executions(4, 0), 6561);
        assert_eq!(canonical_executions(2, 1), 1296);
        assert_eq!(canonical_executions(0, 0), 1);
        assert_eq!(canonical_executions(8, 0), 43_046_721);
        assert_eq!(gamma(2, 1), 36.0);
        assert_eq!(canonical_executions(200, 0), u128::MAX);
    }

    #[test]
    fn equal_partition() {
        for (n, d) in [(6, 3), (20, 10), (5, 3)] {
            assert_eq!(equal_partition_constraint(&Circuit::new("x", n)), d);
        }
    }

    #[test]
    fn lowering_counts() {
        let c = gen_ising_1d(6, 2, 0.3, 0.2).unwrap();
        let l = lower_for_cutting(&c);
        assert_eq!(l.count_kind(GateKind::Cx), 20);
        assert_eq!(l.count_kind(GateKind::Rz), 10);
        let s = Circuit::from_gates("s", 2, vec![Gate::pair(GateKind::Swap, 0, 1), Gate::barrier(vec![0, 1])]).unwrap();
        assert_eq!(lower_for_cutting(&s).len(), 3);
    }

    #[test]
    fn bell_gate_cut_partition() {
        let s = CutStrategy::from_actions(bell(), 1, vec![CutAction::GateCut { gate: 1 }]).unwrap();
        assert_eq!(s.widths(), vec![1, 1]);
        assert_eq!(s.canonical_executions(), 9);
        assert_eq!(s.subcircuits[0].incident_cuts[0].1, CutSide::Left);
        assert!(CutStrategy::uncut(bell(), 1).is_err());
        assert!(CutStrategy::from_actions(bell(), 1, vec![CutAction::GateCut { gate: 0 }]).is_err());
    }

    #[test]
    fn wire_cut_adds_a_segment() {
        // CX(0,1) CX(1,2): cut wire 1 between the two gates.
        let c = Circuit::from_gates("w", 3, vec![Gate::cx(0, 1), Gate::cx(1, 2)]).unwrap();
        let s = CutStrategy::from_actions(c.clone(), 2, vec![CutAction::WireCut { qubit: 1, after_gate: 0 }]).unwrap();
        assert_eq!(s.widths(), vec![2, 2]);
        assert_eq!(s.total_width(), 4);
        let f0 = &s.subcircuits[0].fragment;
        assert_eq!(f0.count_kind(GateKind::Measure), 2);
        assert_eq!(s.subcircuits[1].fragment.count_kind(GateKind::H), 1);
        assert!(CutStrategy::from_actions(c, 2, vec![CutAction::WireCut { qubit: 1, after_gate: 1 }]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = CutStrategy::from_actions(bell(), 1, vec![CutAction::GateCut { gate: 1 }]).unwrap();
        let back = CutStrategy::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert!(CutStrategy::from_json("{}").is_err());
    }
}
