//! Anchor-BFS placement and greedy shortest-path SWAP routing.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::hardware::{Edge, NoiseProfile};
use crate::puncture::Component;

use super::Layout;

/// Component graph restricted to its retained edges.
pub(crate) struct Graph<'a> {
    adj: BTreeMap<usize, Vec<usize>>,
    noise: &'a NoiseProfile,
}

impl<'a> Graph<'a> {
    pub(crate) fn new(qubits: &BTreeSet<usize>, edges: &BTreeSet<Edge>, noise: &'a NoiseProfile) -> Graph<'a> {
        let mut adj: BTreeMap<usize, Vec<usize>> = qubits.iter().map(|&q| (q, Vec::new())).collect();
        for &(a, b) in edges {
            if adj.contains_key(&a) && adj.contains_key(&b) {
                adj.get_mut(&a).unwrap().push(b);
                adj.get_mut(&b).unwrap().push(a);
            }
        }
        Graph { adj, noise }
    }

    fn err(&self, a: usize, b: usize) -> f64 {
        self.noise.edge_error(a, b).unwrap_or(1.0)
    }

    fn qubit_err(&self, q: usize) -> f64 {
        if q < self.noise.readout_error.len() {
            self.noise.qubit_error(q)
        } else {
            1.0
        }
    }

    fn neighbors(&self, q: usize) -> &[usize] {
        self.adj.get(&q).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Fewest-hop path from `a` to `b`; equal-length paths prefer lower summed edge error.
    fn shortest_path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut best: BTreeMap<usize, (usize, f64, usize)> = BTreeMap::new();
        best.insert(a, (0, 0.0, a));
        let mut frontier = vec![a];
        let mut hops = 0;
        while !frontier.is_empty() && !best.contains_key(&b) {
            hops += 1;
            let mut next: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
            for &u in &frontier {
                let cu = best[&u].1;
                for &v in self.neighbors(u) {
                    if best.contains_key(&v) {
                        continue;
                    }
                    let c = cu + self.err(u, v);
                    let e = next.entry(v).or_insert((c, u));
                    if c < e.0 {
                        *e = (c, u);
                    }
                }
            }
            frontier = next.keys().copied().collect();
            for (v, (c, p)) in next {
                best.insert(v, (hops, c, p));
            }
        }
        best.get(&b)?;
        let mut path = vec![b];
        while *path.last().unwrap() != a {
            path.push(best[path.last().unwrap()].2);
        }
        path.reverse();
        Some(path)
    }

    /// Nearest free vertex to `from` by hop count; ties by lower qubit error then index.
    fn nearest_free(&self, from: usize, taken: &BTreeSet<usize>) -> Option<usize> {
        let mut seen = BTreeSet::from([from]);
        let mut layer = vec![from];
        while !layer.is_empty() {
            let free: Vec<usize> = layer.iter().copied().filter(|q| !taken.contains(q)).collect();
            if let Some(&q) =
                free.iter().min_by(|&&x, &&y| self.qubit_err(x).total_cmp(&self.qubit_err(y)).then(x.cmp(&y)))
            {
                return Some(q);
            }
            let mut next = Vec::new();
            for &u in &layer {
                for &v in self.neighbors(u) {
                    if seen.insert(v) {
                        next.push(v);
                    }
                }
            }
            next.sort_unstable();
            layer = next;
        }
        None
    }
}

/// Logical qubits in BFS order from `start` over the interaction graph;
/// each entry carries the already-ordered neighbour it was reached from.
fn bfs_order(c: &Circuit, start: usize) -> Vec<(usize, Option<usize>)> {
    let ig = c.interaction_graph();
    let n = c.num_qubits();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut roots: Vec<usize> = vec![start];
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&q| (std::cmp::Reverse(ig.degree(q)), q));
    roots.extend(by_degree);
    for r in roots {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        order.push((r, None));
        let mut queue = VecDeque::from([r]);
        while let Some(u) = queue.pop_front() {
            let mut nb = ig.neighbors(u);
            let w = |v: usize| ig.edges.get(&(u.min(v), u.max(v))).copied().unwrap_or(0);
            nb.sort_by_key(|&v| (std::cmp::Reverse(w(v)), v));
            for v in nb {
                if !seen[v] {
                    seen[v] = true;
                    order.push((v, Some(u)));
                    queue.push_back(v);
                }
            }
        }
    }
    order
}

fn place(g: &Graph, c: &Circuit, logical_anchor: usize, physical_anchor: usize) -> Option<Vec<usize>> {
    let n = c.num_qubits();
    let mut map = vec![usize::MAX; n];
    let mut taken = BTreeSet::new();
    for (l, parent) in bfs_order(c, logical_anchor) {
        let p = if taken.is_empty() {
            physical_anchor
        } else {
            let base = parent.map(|x| map[x]).unwrap_or(physical_anchor);
            let free_nb = g
                .neighbors(base)
                .iter()
                .copied()
                .filter(|q| !taken.contains(q))
                .min_by(|&x, &y| g.err(base, x).total_cmp(&g.err(base, y)).then(x.cmp(&y)));
            match free_nb {
                Some(q) => q,
                None => g.nearest_free(base, &taken)?,
            }
        };
        map[l] = p;
        taken.insert(p);
    }
    Some(map)
}

/// Lower `c` to `{1q, CX, measure}` on physical qubits, inserting SWAPs (as
/// three CX) so that every CX acts on a component edge. `initial[l]` is the
/// physical qubit logical `l` starts on.
pub(crate) fn route_with(g: &Graph, c: &Circuit, component_id: usize, initial: &[usize]) -> Option<Layout> {
    let mut at = initial.to_vec();
    let mut occupant: BTreeMap<usize, usize> = at.iter().enumerate().map(|(l, &p)| (p, l)).collect();
    let mut ops: Vec<Gate> = Vec::new();
    let cx = |ops: &mut Vec<Gate>, a: usize, b: usize| ops.push(Gate::cx(a, b));
    for gate in c.gates() {
        let q = gate.qubits();
        match gate.kind() {
            GateKind::Barrier => continue,
            _ if !gate.is_two_qubit() => {
                ops.push(gate.remapped(|x| at[x]));
                continue;
            }
            _ => {}
        }
        let (la, lb) = (q[0], q[1]);
        if !g.neighbors(at[la]).contains(&at[lb]) {
            let path = g.shortest_path(at[la], at[lb])?;
            for w in path.windows(2).take(path.len() - 2) {
                let (u, v) = (w[0], w[1]);
                cx(&mut ops, u, v);
                cx(&mut ops, v, u);
                cx(&mut ops, u, v);
                let (ou, ov) = (occupant.remove(&u), occupant.remove(&v));
                if let Some(l) = ou {
                    at[l] = v;
                    occupant.insert(v, l);
                }
                if let Some(l) = ov {
                    at[l] = u;
                    occupant.insert(u, l);
                }
            }
        }
        let (a, b) = (at[la], at[lb]);
        match gate.kind() {
            GateKind::Cx => cx(&mut ops, a, b),
            GateKind::Cz => {
                ops.push(Gate::single(GateKind::H, b));
                cx(&mut ops, a, b);
                ops.push(Gate::single(GateKind::H, b));
            }
            GateKind::Rzz => {
                cx(&mut ops, a, b);
                ops.push(Gate::rz(gate.angle().unwrap(), b));
                cx(&mut ops, a, b);
            }
            GateKind::Swap => {
                cx(&mut ops, a, b);
                cx(&mut ops, b, a);
                cx(&mut ops, a, b);
            }
            k => unreachable!("{k} is not a two-qubit kind"),
        }
    }
    let used: BTreeSet<usize> = initial.iter().copied().chain(ops.iter().flat_map(|g| g.qubits().to_vec())).collect();
    let physical: Vec<usize> = used.into_iter().collect();
    let local = |p: usize| physical.binary_search(&p).unwrap();
    let routed = Circuit::from_gates(
        format!("{}@{}", c.name(), component_id),
        physical.len(),
        ops.iter().map(|g| g.remapped(local)).collect(),
    )
    .expect("routed gates use in-range qubits");
    Some(Layout {
        component_id,
        initial_map: initial.iter().map(|&p| local(p)).collect(),
        final_map: at.iter().map(|&p| local(p)).collect(),
        physical,
        routed,
    })
}

/// Candidate layouts from every anchor vertex, for the highest- and
/// lowest-degree logical qubits.
pub(crate) fn candidate_layouts(c: &Circuit, comp: &Component, noise: &NoiseProfile) -> Vec<Layout> {
    let g = Graph::new(&comp.qubits, &comp.edges, noise);
    let ig = c.interaction_graph();
    let n = c.num_qubits();
    let hi = (0..n).max_by_key(|&q| (ig.degree(q), std::cmp::Reverse(q))).unwrap_or(0);
    let lo = (0..n).min_by_key(|&q| (ig.degree(q), q)).unwrap_or(0);
    let mut anchors = vec![hi];
    if lo != hi {
        anchors.push(lo);
    }
    let mut out = Vec::new();
    for &l in &anchors {
        for &p in &comp.qubits {
            if let Some(init) = place(&g, c, l, p) {
                if let Some(layout) = route_with(&g, c, comp.id, &init) {
                    out.push(layout);
                }
            }
        }
    }
    out
}
