//! Best-first cut search.
//!
//! The search walks the two-qubit gates of the lowered circuit in program
//! order. A state records, for every qubit that still has two-qubit gates
//! ahead, the group (partial subcircuit) its live segment belongs to, plus the
//! width of each live group. At each gate the options are: keep it (merging
//! the operand groups if they fit), gate-cut it, wire-cut one operand so a
//! fresh segment joins the other operand's group, or wire-cut both operands
//! into a fresh width-2 group.
//!
//! States are expanded in order of `(9^g·16^w, sorted action list)`, so the
//! first complete state popped is the cheapest strategy and, among equally
//! cheap ones, the one with the lexicographically smallest action list. If
//! the expansion budget runs out the search restarts as a deterministic beam
//! search.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::{lower_for_cutting, CutAction, CutStrategy};
use crate::circuit::Circuit;

const FREE: u8 = u8::MAX;

/// Execution cost `9^g · 16^w`, ordered by value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cost {
    pub g: usize,
    pub w: usize,
}

impl Cost {
    pub fn new(g: usize, w: usize) -> Cost {
        Cost { g, w }
    }

    pub fn log(&self) -> f64 {
        self.g as f64 * 9f64.ln() + self.w as f64 * 16f64.ln()
    }

    fn add(self, g: usize, w: usize) -> Cost {
        Cost::new(self.g + g, self.w + w)
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        // 9^g·16^w = 3^(2g)·2^(4w) is injective in (g, w), so distinct pairs
        // never tie; compare exactly via g·ln9 + w·ln16 with a fallback.
        self.log()
            .partial_cmp(&other.log())
            .filter(|o| *o != Ordering::Equal)
            .unwrap_or_else(|| (self.g, self.w).cmp(&(other.g, other.w)))
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    /// State expansions before falling back to beam search.
    pub max_expansions: usize,
    pub beam_width: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_expansions: 400_000, beam_width: 2_000 }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    pos: u32,
    /// Group label per qubit (`FREE` when the qubit has no two-qubit gates
    /// ahead), then the width of each label.
    labels: Vec<u8>,
    widths: Vec<u8>,
}

#[derive(Clone, PartialEq, Eq)]
struct Entry {
    cost: Cost,
    actions: Vec<CutAction>,
    state: State,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap.
        other
            .cost
            .cmp(&self.cost)
            .then_with(|| other.actions.cmp(&self.actions))
            .then_with(|| other.state.pos.cmp(&self.state.pos))
            .then_with(|| other.state.labels.cmp(&self.state.labels))
            .then_with(|| other.state.widths.cmp(&self.state.widths))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// (gate index, a, b, previous gate on a, previous gate on b).
type OpEntry = (usize, usize, usize, Option<usize>, Option<usize>);
/// (added gate cuts, added wire cuts, first action, second action, next state).
type Successor = (usize, usize, Option<CutAction>, Option<CutAction>, State);

struct Problem {
    d: usize,
    ops: Vec<OpEntry>,
    /// Whether each operand has an earlier two-qubit gate.
    has_prior: Vec<(bool, bool)>,
    /// Position of the last two-qubit gate per qubit.
    last_op: Vec<Option<usize>>,
    n: usize,
}

impl Problem {
    fn new(c: &Circuit, d: usize) -> Problem {
        let n = c.num_qubits();
        let mut prev_gate: Vec<Option<usize>> = vec![None; n];
        let mut seen_2q = vec![false; n];
        let mut ops = Vec::new();
        let mut has_prior = Vec::new();
        for (t, g) in c.gates().iter().enumerate() {
            let q = g.qubits();
            if g.is_two_qubit() {
                let (a, b) = (q[0], q[1]);
                ops.push((t, a, b, prev_gate[a], prev_gate[b]));
                has_prior.push((seen_2q[a], seen_2q[b]));
                seen_2q[a] = true;
                seen_2q[b] = true;
            }
            for &x in q {
                prev_gate[x] = Some(t);
            }
        }
        let mut last_op = vec![None; n];
        for (i, &(_, a, b, _, _)) in ops.iter().enumerate() {
            last_op[a] = Some(i);
            last_op[b] = Some(i);
        }
        Problem { d, ops, has_prior, last_op, n }
    }

    fn initial(&self) -> State {
        let mut labels = vec![FREE; self.n];
        let mut widths = Vec::new();
        for (q, l) in labels.iter_mut().enumerate() {
            if self.last_op[q].is_some() {
                *l = widths.len() as u8;
                widths.push(1);
            }
        }
        State { pos: 0, labels, widths }
    }

    /// Relabel groups in first-occurrence order and retire finished qubits.
    fn normalize(&self, pos: usize, labels: &mut [u8], widths: &[u8]) -> State {
        for (q, l) in labels.iter_mut().enumerate() {
            if self.last_op[q].is_none_or(|last| last < pos) {
                *l = FREE;
            }
        }
        let mut map = [FREE; 256];
        let mut new_widths = Vec::new();
        for l in labels.iter_mut() {
            if *l == FREE {
                continue;
            }
            if map[*l as usize] == FREE {
                map[*l as usize] = new_widths.len() as u8;
                new_widths.push(widths[*l as usize]);
            }
            *l = map[*l as usize];
        }
        State { pos: pos as u32, labels: labels.to_vec(), widths: new_widths }
    }

    fn successors(&self, s: &State) -> Vec<Successor> {
        let i = s.pos as usize;
        let (t, a, b, prev_a, prev_b) = self.ops[i];
        let (prior_a, prior_b) = self.has_prior[i];
        let (ga, gb) = (s.labels[a], s.labels[b]);
        let (wa, wb) = (s.widths[ga as usize] as usize, s.widths[gb as usize] as usize);
        let d = self.d;
        let mut out = Vec::new();
        let next = |labels: Vec<u8>, widths: Vec<u8>| {
            let mut labels = labels;
            self.normalize(i + 1, &mut labels, &widths)
        };
        let wire = |q: usize, prev: Option<usize>| CutAction::WireCut {
            qubit: q,
            after_gate: prev.expect("wire cut needs an earlier gate"),
        };
        if ga == gb {
            out.push((0, 0, None, None, next(s.labels.clone(), s.widths.clone())));
        } else {
            if wa + wb <= d {
                let mut labels = s.labels.clone();
                let mut widths = s.widths.clone();
                for l in labels.iter_mut() {
                    if *l == gb {
                        *l = ga;
                    }
                }
                widths[ga as usize] = (wa + wb) as u8;
                out.push((0, 0, None, None, next(labels, widths)));
            }
            out.push((1, 0, Some(CutAction::GateCut { gate: t }), None, next(s.labels.clone(), s.widths.clone())));
            if prior_a && wb < d {
                let mut labels = s.labels.clone();
                let mut widths = s.widths.clone();
                labels[a] = gb;
                widths[gb as usize] += 1;
                out.push((0, 1, Some(wire(a, prev_a)), None, next(labels, widths)));
            }
            if prior_b && wa < d {
                let mut labels = s.labels.clone();
                let mut widths = s.widths.clone();
                labels[b] = ga;
                widths[ga as usize] += 1;
                out.push((0, 1, Some(wire(b, prev_b)), None, next(labels, widths)));
            }
        }
        if prior_a && prior_b && d >= 2 {
            let mut labels = s.labels.clone();
            let mut widths = s.widths.clone();
            let fresh = widths.len() as u8;
            labels[a] = fresh;
            labels[b] = fresh;
            widths.push(2);
            out.push((0, 2, Some(wire(a, prev_a)), Some(wire(b, prev_b)), next(labels, widths)));
        }
        out
    }
}

fn extend(actions: &[CutAction], x: Option<CutAction>, y: Option<CutAction>) -> Vec<CutAction> {
    let mut v = actions.to_vec();
    for a in [x, y].into_iter().flatten() {
        let pos = v.binary_search(&a).unwrap_or_else(|p| p);
        v.insert(pos, a);
    }
    v
}

fn best_first(p: &Problem, max_expansions: usize, bound: Option<Cost>) -> Option<Option<(Cost, Vec<CutAction>)>> {
    let mut best: HashMap<State, (Cost, Vec<CutAction>)> = HashMap::new();
    let mut heap = BinaryHeap::new();
    let start = p.initial();
    best.insert(start.clone(), (Cost::new(0, 0), Vec::new()));
    heap.push(Entry { cost: Cost::new(0, 0), actions: Vec::new(), state: start });
    let mut expansions = 0usize;
    while let Some(Entry { cost, actions, state }) = heap.pop() {
        if best.get(&state).is_some_and(|(c, a)| (*c, a) < (cost, &actions)) {
            continue;
        }
        if bound.is_some_and(|b| cost > b) {
            return Some(None);
        }
        if state.pos as usize == p.ops.len() {
            return Some(Some((cost, actions)));
        }
        expansions += 1;
        if expansions > max_expansions {
            return None;
        }
        for (dg, dw, x, y, next) in p.successors(&state) {
            let nc = cost.add(dg, dw);
            let na = extend(&actions, x, y);
            let better = match best.get(&next) {
                Some((c, a)) => (nc, &na) < (*c, a),
                None => true,
            };
            if better {
                best.insert(next.clone(), (nc, na.clone()));
                heap.push(Entry { cost: nc, actions: na, state: next });
            }
        }
    }
    Some(None)
}

fn beam(p: &Problem, width: usize, bound: Option<Cost>) -> Option<(Cost, Vec<CutAction>)> {
    let mut layer: HashMap<State, (Cost, Vec<CutAction>)> = HashMap::new();
    layer.insert(p.initial(), (Cost::new(0, 0), Vec::new()));
    for _ in 0..p.ops.len() {
        let mut next_layer: HashMap<State, (Cost, Vec<CutAction>)> = HashMap::new();
        for (state, (cost, actions)) in &layer {
            for (dg, dw, x, y, next) in p.successors(state) {
                let nc = cost.add(dg, dw);
                if bound.is_some_and(|b| nc > b) {
                    continue;
                }
                let na = extend(actions, x, y);
                let better = match next_layer.get(&next) {
                    Some((c, a)) => (nc, &na) < (*c, a),
                    None => true,
                };
                if better {
                    next_layer.insert(next, (nc, na));
                }
            }
        }
        let mut ranked: Vec<(State, (Cost, Vec<CutAction>))> = next_layer.into_iter().collect();
        ranked.sort_by(|x, y| {
            (x.1 .0, &x.1 .1, &x.0.labels, &x.0.widths).cmp(&(y.1 .0, &y.1 .1, &y.0.labels, &y.0.widths))
        });
        ranked.truncate(width);
        layer = ranked.into_iter().collect();
        if layer.is_empty() {
            return None;
        }
    }
    layer.into_values().min_by(|x, y| (x.0, &x.1).cmp(&(y.0, &y.1)))
}

/// Search on an already-lowered circuit.
pub fn search_lowered(lowered: &Circuit, d: usize, cfg: &SearchConfig) -> Option<Vec<CutAction>> {
    search_within(lowered, d, cfg, None)
}

/// As [`search_lowered`], but gives up as soon as every remaining partial
/// strategy costs more than any strategy with at most `k_max` actions.
fn search_within(lowered: &Circuit, d: usize, cfg: &SearchConfig, k_max: Option<usize>) -> Option<Vec<CutAction>> {
    let bound = k_max.filter(|&k| k <= 256).map(|k| Cost::new(0, k));
    if d == 0 {
        return None;
    }
    let n = lowered.num_qubits();
    if d >= n || lowered.two_qubit_count() == 0 {
        return Some(Vec::new());
    }
    assert!(n < FREE as usize, "cut search supports fewer than 255 qubits");
    let p = Problem::new(lowered, d);
    match best_first(&p, cfg.max_expansions, bound) {
        Some(found) => found.map(|(_, a)| a),
        None => beam(&p, cfg.beam_width, bound).map(|(_, a)| a),
    }
}

/// Cheapest strategy with every subcircuit at most `d` wide, or `None` if
/// none exists or it needs more than `k_max` cuts.
pub fn find_cuts(c: &Circuit, d: usize, k_max: usize) -> Option<CutStrategy> {
    find_cuts_with(c, d, k_max, &SearchConfig::default())
}

pub fn find_cuts_with(c: &Circuit, d: usize, k_max: usize, cfg: &SearchConfig) -> Option<CutStrategy> {
    let lowered = lower_for_cutting(c);
    let d_eff = d.min(c.num_qubits().max(1));
    let actions = search_within(&lowered, d_eff, cfg, Some(k_max))?;
    if actions.len() > k_max {
        return None;
    }
    let s = CutStrategy::from_actions(lowered, d, actions).expect("search produces valid strategies");
    Some(s)
}
