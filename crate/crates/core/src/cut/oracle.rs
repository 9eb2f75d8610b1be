//! Exhaustive minimum-cost cut enumeration for small circuits.
//!
//! Candidate actions are every two-qubit gate (gate cut) and every gap between
//! consecutive two-qubit gates on a wire (wire cut). Action-count classes
//! `(g, w)` are visited in increasing `9^g·16^w`; inside a class, sets are
//! visited in lexicographic order. The first feasible set is returned.

use thiserror::Error;

use super::search::Cost;
use super::{lower_for_cutting, CutAction, CutStrategy};
use crate::circuit::Circuit;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("enumeration space of {needed} action sets exceeds the cap of {cap}")]
    BudgetExceeded { needed: u128, cap: u128 },
    #[error("oracle supports at most 64 two-qubit gates, circuit has {0}")]
    TooManyGates(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Maximum number of action sets to evaluate.
    pub cap: u128,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { cap: 150_000_000 }
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Advance `idx` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

struct Model {
    n: usize,
    d: usize,
    /// (a, position of this gate among a's two-qubit gates, b, position on b).
    ops: Vec<(usize, usize, usize, usize)>,
    gate_index: Vec<usize>,
    /// Wire-cut candidates: (qubit, gap after the j-th two-qubit gate, after_gate).
    gaps: Vec<(usize, usize, usize)>,
    /// Two-qubit gate count per qubit.
    per_wire: Vec<usize>,
}

impl Model {
    fn new(c: &Circuit, d: usize) -> Model {
        let n = c.num_qubits();
        let mut per_wire = vec![0usize; n];
        let mut ops = Vec::new();
        let mut gate_index = Vec::new();
        let mut prev_gate = vec![usize::MAX; n];
        let mut gaps = Vec::new();
        for (t, g) in c.gates().iter().enumerate() {
            let q = g.qubits();
            if g.is_two_qubit() {
                let (a, b) = (q[0], q[1]);
                for &x in &[a, b] {
                    if per_wire[x] > 0 {
                        gaps.push((x, per_wire[x] - 1, prev_gate[x]));
                    }
                }
                ops.push((a, per_wire[a], b, per_wire[b]));
                gate_index.push(t);
                per_wire[a] += 1;
                per_wire[b] += 1;
            }
            for &x in q {
                prev_gate[x] = t;
            }
        }
        gaps.sort();
        Model { n, d, ops, gate_index, gaps, per_wire }
    }

    /// Widths of all subcircuits are ≤ d under the given cuts.
    fn feasible(&self, gate_mask: u64, wire_sel: &[usize], scratch: &mut Scratch) -> bool {
        let Scratch { cuts, base, parent, size } = scratch;
        for c in cuts.iter_mut() {
            c.clear();
        }
        for &i in wire_sel {
            let (q, j, _) = self.gaps[i];
            cuts[q].push(j);
        }
        let mut total = 0;
        for q in 0..self.n {
            base[q] = total;
            total += if self.per_wire[q] == 0 { 0 } else { cuts[q].len() + 1 };
        }
        parent.clear();
        parent.extend(0..total);
        size.clear();
        size.resize(total, 1);
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (i, &(a, ja, b, jb)) in self.ops.iter().enumerate() {
            if gate_mask >> i & 1 == 1 {
                continue;
            }
            let sa = base[a] + cuts[a].iter().filter(|&&k| k < ja).count();
            let sb = base[b] + cuts[b].iter().filter(|&&k| k < jb).count();
            let (ra, rb) = (find(parent, sa), find(parent, sb));
            if ra != rb {
                let s = size[ra] + size[rb];
                if s > self.d {
                    return false;
                }
                parent[rb] = ra;
                size[ra] = s;
            }
        }
        true
    }
}

struct Scratch {
    cuts: Vec<Vec<usize>>,
    base: Vec<usize>,
    parent: Vec<usize>,
    size: Vec<usize>,
}

/// Provably cheapest strategy using at most `max_actions` cuts, or `None` if
/// no such strategy exists.
pub fn oracle_min_cuts(
    c: &Circuit,
    d: usize,
    max_actions: usize,
    cfg: &OracleConfig,
) -> Result<Option<CutStrategy>, OracleError> {
    let lowered = lower_for_cutting(c);
    if d == 0 {
        return Ok(None);
    }
    let model = Model::new(&lowered, d);
    let ng = model.ops.len();
    if ng > 64 {
        return Err(OracleError::TooManyGates(ng));
    }
    let nw = model.gaps.len();
    let mut classes: Vec<Cost> = Vec::new();
    for g in 0..=max_actions.min(ng) {
        for w in 0..=(max_actions - g).min(nw) {
            classes.push(Cost::new(g, w));
        }
    }
    classes.sort();
    let mut scratch =
        Scratch { cuts: vec![Vec::new(); model.n], base: vec![0; model.n], parent: Vec::new(), size: Vec::new() };
    let mut spent: u128 = 0;
    for class in classes {
        let size = binom(ng, class.g) * binom(nw, class.w);
        if spent + size > cfg.cap {
            return Err(OracleError::BudgetExceeded { needed: spent + size, cap: cfg.cap });
        }
        spent += size;
        let mut gsel: Vec<usize> = (0..class.g).collect();
        loop {
            let mask = gsel.iter().fold(0u64, |m, &i| m | 1 << i);
            let mut wsel: Vec<usize> = (0..class.w).collect();
            loop {
                if model.feasible(mask, &wsel, &mut scratch) {
                    let mut actions: Vec<CutAction> =
                        gsel.iter().map(|&i| CutAction::GateCut { gate: model.gate_index[i] }).collect();
                    actions.extend(wsel.iter().map(|&i| {
                        let (q, _, after) = model.gaps[i];
                        CutAction::WireCut { qubit: q, after_gate: after }
                    }));
                    let s = CutStrategy::from_actions(lowered, d, actions).expect("oracle checked feasibility");
                    return Ok(Some(s));
                }
                if !next_combination(&mut wsel, nw) {
                    break;
                }
            }
            if !next_combination(&mut gsel, ng) {
                break;
            }
        }
    }
    Ok(None)
}
