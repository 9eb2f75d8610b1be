//! Benchmark circuit generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Circuit, CircuitError, Gate, GateKind};

/// Trotterised 1D transverse-field Ising evolution.
///
/// Each step applies `RZZ(theta_zz)` on every nearest-neighbour bond in
/// brickwork order (even bonds `(0,1),(2,3),…` then odd bonds `(1,2),(3,4),…`)
/// followed by `RX(theta_x)` on every qubit. The bond set per step is the
/// full path `0–1–…–(n−1)`.
pub fn gen_ising_1d(n: usize, steps: usize, theta_zz: f64, theta_x: f64) -> Result<Circuit, CircuitError> {
    if n < 2 {
        return Err(CircuitError::InvalidParameter(format!("ising chain needs n >= 2, got {n}")));
    }
    if steps < 1 {
        return Err(CircuitError::InvalidParameter("ising evolution needs steps >= 1".into()));
    }
    if !theta_zz.is_finite() || !theta_x.is_finite() {
        return Err(CircuitError::InvalidParameter("non-finite angle".into()));
    }
    let mut c = Circuit::new(format!("ising_1d_n{n}_s{steps}"), n);
    for _ in 0..steps {
        for start in [0, 1] {
            for a in (start..n - 1).step_by(2) {
                c.push_unchecked(Gate::rzz(theta_zz, a, a + 1));
            }
        }
        for q in 0..n {
            c.push_unchecked(Gate::rx(theta_x, q));
        }
    }
    Ok(c)
}

/// The 24 single-qubit Cliffords as gate words: the six axis permutations
/// `{I, H, S, HS, SH, HSH}` times the four Paulis.
fn clifford_word(index: usize) -> Vec<GateKind> {
    use GateKind::*;
    let perm: &[GateKind] = match index / 4 {
        0 => &[],
        1 => &[H],
        2 => &[S],
        3 => &[H, S],
        4 => &[S, H],
        _ => &[H, S, H],
    };
    let pauli: &[GateKind] = match index % 4 {
        0 => &[],
        1 => &[X],
        2 => &[Y],
        _ => &[Z],
    };
    perm.iter().chain(pauli).copied().collect()
}

/// Layered random Clifford circuit. Each layer draws a uniformly random
/// single-qubit Clifford per qubit, then CX gates on a random perfect
/// matching (one qubit idles when `n` is odd). Fully determined by `seed`.
pub fn gen_random_clifford(n: usize, depth: usize, seed: u64) -> Result<Circuit, CircuitError> {
    if n < 2 {
        return Err(CircuitError::InvalidParameter(format!("random clifford needs n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(format!("clifford_n{n}_d{depth}_s{seed}"), n);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..depth {
        for q in 0..n {
            for k in clifford_word(rng.gen_range(0..24)) {
                c.push_unchecked(Gate::single(k, q));
            }
        }
        order.shuffle(&mut rng);
        for pair in order.chunks_exact(2) {
            c.push_unchecked(Gate::cx(pair[0], pair[1]));
        }
    }
    Ok(c)
}

/// Forward QAOA ansatz: `H` on all qubits, then for each layer `RZZ(2γ)` on
/// every edge and `RX(2β)` on every qubit.
pub fn gen_qaoa(n: usize, edges: &[(usize, usize)], gammas: &[f64], betas: &[f64]) -> Result<Circuit, CircuitError> {
    if n < 2 {
        return Err(CircuitError::InvalidParameter(format!("qaoa needs n >= 2, got {n}")));
    }
    if gammas.len() != betas.len() || gammas.is_empty() {
        return Err(CircuitError::InvalidParameter("gammas and betas must be nonempty and of equal length".into()));
    }
    if gammas.iter().chain(betas).any(|x| !x.is_finite()) {
        return Err(CircuitError::InvalidParameter("non-finite angle".into()));
    }
    for &(a, b) in edges {
        if a == b {
            return Err(CircuitError::InvalidParameter(format!("self-loop edge ({a},{b})")));
        }
        if a.max(b) >= n {
            return Err(CircuitError::QubitOutOfRange { qubit: a.max(b), num_qubits: n });
        }
    }
    let mut c = Circuit::new(format!("qaoa_n{n}_p{}", gammas.len()), n);
    for q in 0..n {
        c.push_unchecked(Gate::single(GateKind::H, q));
    }
    for (g, b) in gammas.iter().zip(betas) {
        for &(u, v) in edges {
            c.push_unchecked(Gate::rzz(2.0 * g, u, v));
        }
        for q in 0..n {
            c.push_unchecked(Gate::rx(2.0 * b, q));
        }
    }
    Ok(c)
}

/// QAOA ansatz followed by its inverse; the ideal output is `|0…0⟩`.
pub fn gen_qaoa_mirrored(
    n: usize,
    edges: &[(usize, usize)],
    gammas: &[f64],
    betas: &[f64],
) -> Result<Circuit, CircuitError> {
    let mut c = gen_qaoa(n, edges, gammas, betas)?.mirrored();
    c.set_name(format!("qaoa_mirrored_n{n}_p{}", gammas.len()));
    Ok(c)
}

/// Edges of the path graph `0–1–…–(n−1)`.
pub fn path_edges(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|i| (i - 1, i)).collect()
}

/// Edges of the ring graph on `n` vertices.
pub fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    let mut e = path_edges(n);
    if n > 2 {
        e.push((n - 1, 0));
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_counts() {
        let c = gen_ising_1d(6, 2, 0.3, 0.2).unwrap();
        assert_eq!(c.count_kind(GateKind::Rzz), 10);
        assert_eq!(c.count_kind(GateKind::Rx), 12);
        let g = c.interaction_graph();
        assert_eq!(g.edges.len(), 5);
        assert!(g.edges.values().all(|&w| w == 2));
        assert!((0..5).all(|i| g.edges.contains_key(&(i, i + 1))));
    }

    #[test]
    fn ising_smallest() {
        let c = gen_ising_1d(2, 1, 0.1, 0.2).unwrap();
        assert_eq!(c.gates(), &[Gate::rzz(0.1, 0, 1), Gate::rx(0.2, 0), Gate::rx(0.2, 1)]);
        assert!(gen_ising_1d(1, 1, 0.1, 0.1).is_err());
        assert!(gen_ising_1d(3, 0, 0.1, 0.1).is_err());
    }

    #[test]
    fn clifford_words_are_distinct() {
        let words: std::collections::BTreeSet<Vec<GateKind>> = (0..24).map(clifford_word).collect();
        assert_eq!(words.len(), 24);
    }

    #[test]
    fn clifford_deterministic() {
        let a = gen_random_clifford(4, 10, 7).unwrap();
        let b = gen_random_clifford(4, 10, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.count_kind(GateKind::Cx), 20);
        assert_ne!(a, gen_random_clifford(4, 10, 8).unwrap());
        assert!(gen_random_clifford(1, 3, 0).is_err());
    }

    #[test]
    fn mirrored_qaoa_doubles_two_qubit_count() {
        let e = ring_edges(6);
        let fwd = gen_qaoa(6, &e, &[0.4], &[0.7]).unwrap();
        let m = gen_qaoa_mirrored(6, &e, &[0.4], &[0.7]).unwrap();
        assert_eq!(m.two_qubit_count(), 2 * fwd.two_qubit_count());
        assert!(gen_qaoa(6, &[(0, 6)], &[0.1], &[0.1]).is_err());
        assert!(gen_qaoa(1, &[], &[0.1], &[0.1]).is_err());
    }
}
