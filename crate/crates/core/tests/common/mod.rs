//! Dense-matrix reference implementations used as test oracles.
#![allow(dead_code)]

use num_complex::Complex64 as C;

use hic_core::circuit::{Circuit, GateKind, Observable, Pauli, PauliString};

pub type M = Vec<Vec<C>>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn zeros(n: usize) -> M {
    vec![vec![c(0.0, 0.0); n]; n]
}

pub fn eye(n: usize) -> M {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

pub fn from(rows: &[&[C]]) -> M {
    rows.iter().map(|r| r.to_vec()).collect()
}

pub fn mul(a: &M, b: &M) -> M {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    let mut out = vec![vec![c(0.0, 0.0); m]; n];
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            if x == c(0.0, 0.0) {
                continue;
            }
            for j in 0..m {
                out[i][j] += x * b[l][j];
            }
        }
    }
    out
}

pub fn add(a: &M, b: &M) -> M {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect()
}

pub fn scale(a: &M, s: C) -> M {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn dagger(a: &M) -> M {
    let n = a.len();
    let m = a[0].len();
    (0..m).map(|j| (0..n).map(|i| a[i][j].conj()).collect()).collect()
}

pub fn conj(a: &M) -> M {
    a.iter().map(|r| r.iter().map(|x| x.conj()).collect()).collect()
}

pub fn transpose(a: &M) -> M {
    let n = a.len();
    let m = a[0].len();
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

pub fn kron(a: &M, b: &M) -> M {
    let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![c(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn trace(a: &M) -> C {
    (0..a.len()).map(|i| a[i][i]).sum()
}

pub fn max_abs_diff(a: &M, b: &M) -> f64 {
    a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm())).fold(0.0, f64::max)
}

pub fn pauli_x() -> M {
    from(&[&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]])
}

pub fn pauli_y() -> M {
    from(&[&[c(0.0, 0.0), c(0.0, -1.0)], &[c(0.0, 1.0), c(0.0, 0.0)]])
}

pub fn pauli_z() -> M {
    from(&[&[c(1.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(-1.0, 0.0)]])
}

pub fn proj(bit: usize) -> M {
    let mut m = zeros(2);
    m[bit][bit] = c(1.0, 0.0);
    m
}

/// Single-qubit unitary, built from Pauli algebra rather than closed forms.
pub fn unitary_1q(kind: GateKind, theta: f64) -> M {
    let i2 = eye(2);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // exp(-i t/2 P) = cos(t/2) I − i sin(t/2) P
    let rot = |p: M, t: f64| add(&scale(&i2, c((t / 2.0).cos(), 0.0)), &scale(&p, c(0.0, -(t / 2.0).sin())));
    // Phase gates as Rz up to a global phase e^{i t/2}.
    let phase = |t: f64| scale(&rot(pauli_z(), t), C::from_polar(1.0, t / 2.0));
    match kind {
        GateKind::H => scale(&add(&pauli_x(), &pauli_z()), c(r, 0.0)),
        GateKind::X => pauli_x(),
        GateKind::Y => pauli_y(),
        GateKind::Z => pauli_z(),
        GateKind::S => phase(std::f64::consts::FRAC_PI_2),
        GateKind::Sdg => phase(-std::f64::consts::FRAC_PI_2),
        GateKind::T => phase(std::f64::consts::FRAC_PI_4),
        GateKind::Tdg => phase(-std::f64::consts::FRAC_PI_4),
        GateKind::Rz => rot(pauli_z(), theta),
        GateKind::Rx => rot(pauli_x(), theta),
        k => panic!("{k} is not single-qubit"),
    }
}

/// Two-qubit unitary with the first operand as the high-order factor.
pub fn unitary_2q(kind: GateKind, theta: f64) -> M {
    let i2 = eye(2);
    let zz = kron(&pauli_z(), &pauli_z());
    match kind {
        GateKind::Cx => add(&kron(&proj(0), &i2), &kron(&proj(1), &pauli_x())),
        GateKind::Cz => add(&kron(&proj(0), &i2), &kron(&proj(1), &pauli_z())),
        GateKind::Rzz => add(&scale(&eye(4), c((theta / 2.0).cos(), 0.0)), &scale(&zz, c(0.0, -(theta / 2.0).sin()))),
        GateKind::Swap => {
            let mut s = add(&eye(4), &kron(&pauli_x(), &pauli_x()));
            s = add(&s, &kron(&pauli_y(), &pauli_y()));
            s = add(&s, &zz);
            scale(&s, c(0.5, 0.0))
        }
        k => panic!("{k} is not two-qubit"),
    }
}

/// Place `ops` (qubit → 2×2 matrix) into an `n`-qubit operator; qubit 0 is
/// the lowest-order factor.
pub fn embed(n: usize, ops: &[(usize, M)]) -> M {
    let mut out = eye(1);
    for q in (0..n).rev() {
        let f = ops.iter().find(|(x, _)| *x == q).map(|(_, m)| m.clone()).unwrap_or_else(|| eye(2));
        out = kron(&out, &f);
    }
    out
}

/// Full-register unitary of a gate.
pub fn gate_unitary(n: usize, kind: GateKind, qubits: &[usize], theta: f64) -> M {
    if qubits.len() == 1 {
        return embed(n, &[(qubits[0], unitary_1q(kind, theta))]);
    }
    // Expand the 4×4 matrix in the Pauli-product basis {|i⟩⟨j|} ⊗ {|k⟩⟨l|}.
    let u = unitary_2q(kind, theta);
    let mut out = zeros(1 << n);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let coef = u[i * 2 + k][j * 2 + l];
                    if coef == c(0.0, 0.0) {
                        continue;
                    }
                    let mut a = zeros(2);
                    a[i][j] = c(1.0, 0.0);
                    let mut b = zeros(2);
                    b[k][l] = c(1.0, 0.0);
                    out = add(&out, &scale(&embed(n, &[(qubits[0], a), (qubits[1], b)]), coef));
                }
            }
        }
    }
    out
}

pub fn pauli_matrix(n: usize, p: &PauliString) -> M {
    let ops: Vec<(usize, M)> =
        p.0.iter()
            .map(|(&q, &x)| {
                let m = match x {
                    Pauli::X => pauli_x(),
                    Pauli::Y => pauli_y(),
                    Pauli::Z => pauli_z(),
                };
                (q, m)
            })
            .collect();
    embed(n, &ops)
}

/// Density matrix after running `c` on `|0…0⟩`; measurements and barriers are skipped.
pub fn density(c: &Circuit) -> M {
    let n = c.num_qubits();
    let mut rho = zeros(1 << n);
    rho[0][0] = c1();
    for g in c.gates() {
        if matches!(g.kind(), GateKind::Measure | GateKind::Barrier) {
            continue;
        }
        let u = gate_unitary(n, g.kind(), g.qubits(), g.angle().unwrap_or(0.0));
        rho = mul(&mul(&u, &rho), &dagger(&u));
    }
    rho
}

fn c1() -> C {
    c(1.0, 0.0)
}

pub fn expectation(c: &Circuit, obs: &Observable) -> f64 {
    let rho = density(c);
    let n = c.num_qubits();
    obs.terms.iter().map(|(w, p)| w * trace(&mul(&rho, &pauli_matrix(n, p))).re).sum()
}

/// A linear map on one qubit, `ρ ↦ Σ w·A ρ B`.
pub type LocalMap = Vec<(M, M, f64)>;

/// The map of a local op sequence; `Measure` is a Z measurement whose ±1
/// outcome multiplies the result when `signed`.
pub fn local_map(ops: &[GateKind], signed: bool) -> LocalMap {
    let mut terms: LocalMap = vec![(eye(2), eye(2), 1.0)];
    for &op in ops {
        let step: LocalMap = if op == GateKind::Measure {
            let s1 = if signed { -1.0 } else { 1.0 };
            vec![(proj(0), proj(0), 1.0), (proj(1), proj(1), s1)]
        } else {
            let u = unitary_1q(op, 0.0);
            vec![(u.clone(), dagger(&u), 1.0)]
        };
        let mut next = Vec::new();
        for (a, b, w) in &terms {
            for (sa, sb, sw) in &step {
                next.push((mul(sa, a), mul(b, sb), w * sw));
            }
        }
        terms = next;
    }
    terms
}

/// Superoperator acting on row-major `vec(ρ)`: `A ρ B ↦ (A ⊗ Bᵀ)`.
pub fn superop(terms: &[(M, M, f64)]) -> M {
    let d = terms[0].0.len();
    let mut out = zeros(d * d);
    for (a, b, w) in terms {
        out = add(&out, &scale(&kron(a, &transpose(b)), c(*w, 0.0)));
    }
    out
}

pub fn unitary_superop(u: &M) -> M {
    kron(u, &conj(u))
}

/// Two local maps combined on a two-qubit register (first factor high-order).
pub fn product_map(left: &LocalMap, right: &LocalMap) -> Vec<(M, M, f64)> {
    let mut out = Vec::new();
    for (a1, b1, w1) in left {
        for (a2, b2, w2) in right {
            out.push((kron(a1, a2), kron(b1, b2), w1 * w2));
        }
    }
    out
}

/// Max-abs deviation between the QPD sum for a cut gate and the gate's own
/// superoperator, plus the decomposition's 1-norm.
pub fn gate_cut_deviation(gate: &hic_core::circuit::Gate) -> (f64, f64) {
    let terms = hic_core::qpd::decompose_gate_cut(gate).expect("supported gate");
    let mut total = zeros(16);
    for t in &terms {
        let m = product_map(&local_map(&t.left, true), &local_map(&t.right, true));
        total = add(&total, &scale(&superop(&m), c(t.coefficient, 0.0)));
    }
    let target = unitary_superop(&unitary_2q(gate.kind(), gate.angle().unwrap_or(0.0)));
    (max_abs_diff(&total, &target), hic_core::qpd::one_norm_gate(&terms))
}

/// Same check for the wire-cut decomposition against the identity channel.
pub fn wire_cut_deviation() -> (f64, f64) {
    let terms = hic_core::qpd::decompose_wire_cut();
    let mut total = zeros(4);
    for t in &terms {
        // Measure side: ρ ↦ Σ_m s_m Tr(P_m U ρ U†), as a row over vec(ρ).
        let mut u = eye(2);
        for &op in t.measure.iter().filter(|&&k| k != GateKind::Measure) {
            u = mul(&unitary_1q(op, 0.0), &u);
        }
        let mut row = [c(0.0, 0.0); 4];
        for m in 0..2 {
            let s = if t.signed && m == 1 { -1.0 } else { 1.0 };
            let e = mul(&mul(&dagger(&u), &proj(m)), &u);
            for i in 0..2 {
                for j in 0..2 {
                    row[i * 2 + j] += e[j][i] * s;
                }
            }
        }
        // Prepare side: σ = V|0⟩⟨0|V†.
        let mut v = eye(2);
        for &op in &t.prepare {
            v = mul(&unitary_1q(op, 0.0), &v);
        }
        let sigma = mul(&mul(&v, &proj(0)), &dagger(&v));
        for i in 0..2 {
            for j in 0..2 {
                for (k, r) in row.iter().enumerate() {
                    total[i * 2 + j][k] += sigma[i][j] * r * t.coefficient;
                }
            }
        }
    }
    (max_abs_diff(&total, &eye(4)), hic_core::qpd::one_norm_wire(&terms))
}
