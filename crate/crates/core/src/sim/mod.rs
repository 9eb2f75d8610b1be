//! Statevector simulation.
//!
//! Qubit `q` is bit `q` of the basis-state index.

pub mod noisy;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::circuit::{Circuit, Gate, GateKind, Observable, Pauli, PauliString};

pub use noisy::{noisy_expectation, run_noisy_requests, NoisyConfig, NoisyProgram};

/// Largest register the simulators accept by default.
pub const DEFAULT_QUBIT_CAP: usize = 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{n} qubits exceed the simulator cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("measurement on qubit {qubit} is followed by further gates; use the subexperiment path")]
    MidCircuitMeasure { qubit: usize },
    #[error("gate {gate} acts on {what} with no calibration entry")]
    UnmappedOp { gate: usize, what: String },
    #[error("noisy backend needs a diagonal (Z-only) observable")]
    NonDiagonal,
    #[error("observable touches qubit {qubit} outside the {num_qubits}-qubit circuit")]
    ObservableOutOfRange { qubit: usize, num_qubits: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Matrix2 = [[C64; 2]; 2];

/// Closed-form 2×2 unitary of a single-qubit gate.
pub fn matrix_1q(kind: GateKind, theta: f64) -> Matrix2 {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::H => [[l * r, l * r], [l * r, -l * r]],
        GateKind::X => [[o, l], [l, o]],
        GateKind::Y => [[o, -i], [i, o]],
        GateKind::Z => [[l, o], [o, -l]],
        GateKind::S => [[l, o], [o, i]],
        GateKind::Sdg => [[l, o], [o, -i]],
        GateKind::T => [[l, o], [o, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]],
        GateKind::Tdg => [[l, o], [o, C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]],
        GateKind::Rz => [[C64::from_polar(1.0, -theta / 2.0), o], [o, C64::from_polar(1.0, theta / 2.0)]],
        GateKind::Rx => {
            let (s, c) = (theta / 2.0).sin_cos();
            [[l * c, -i * s], [-i * s, l * c]]
        }
        k => panic!("{k} is not a single-qubit unitary"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn new(n: usize) -> Result<StateVector, SimError> {
        Self::with_cap(n, DEFAULT_QUBIT_CAP)
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<StateVector, SimError> {
        if n > cap || n >= 32 {
            return Err(SimError::CapExceeded { n, cap });
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_matrix(&mut self, q: usize, m: &Matrix2) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply_pauli(&mut self, q: usize, p: Pauli) {
        let k = match p {
            Pauli::X => GateKind::X,
            Pauli::Y => GateKind::Y,
            Pauli::Z => GateKind::Z,
        };
        self.apply_matrix(q, &matrix_1q(k, 0.0));
    }

    /// Apply a unitary gate. Measurements and barriers are ignored here.
    pub fn apply(&mut self, g: &Gate) {
        let q = g.qubits();
        match g.kind() {
            GateKind::Measure | GateKind::Barrier => {}
            GateKind::Cx => {
                let (c, t) = (1usize << q[0], 1usize << q[1]);
                for i in 0..self.amps.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amps.swap(i, i | t);
                    }
                }
            }
            GateKind::Cz => {
                let m = (1usize << q[0]) | (1usize << q[1]);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m == m {
                        *a = -*a;
                    }
                }
            }
            GateKind::Rzz => {
                let theta = g.angle().unwrap();
                let even = C64::from_polar(1.0, -theta / 2.0);
                let odd = C64::from_polar(1.0, theta / 2.0);
                let (a, b) = (q[0], q[1]);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    *amp *= if (i >> a ^ i >> b) & 1 == 0 { even } else { odd };
                }
            }
            GateKind::Swap => {
                let (a, b) = (1usize << q[0], 1usize << q[1]);
                for i in 0..self.amps.len() {
                    if i & a != 0 && i & b == 0 {
                        self.amps.swap(i, i ^ a ^ b);
                    }
                }
            }
            k => self.apply_matrix(q[0], &matrix_1q(k, g.angle().unwrap_or(0.0))),
        }
    }

    /// Probability weight of qubit `q` reading 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps.iter().enumerate().filter(|(i, _)| i & bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Zero the amplitudes inconsistent with `q = outcome` (no renormalisation).
    pub fn project(&mut self, q: usize, outcome: bool) {
        let bit = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) != outcome {
                *a = C64::new(0.0, 0.0);
            }
        }
    }

    pub fn scale(&mut self, f: f64) {
        for a in &mut self.amps {
            *a *= f;
        }
    }

    /// `⟨ψ|P|ψ⟩` (unnormalised states give weighted values).
    pub fn pauli_expectation(&self, p: &PauliString) -> f64 {
        let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
        for (&q, &pauli) in &p.0 {
            match pauli {
                Pauli::X => x |= 1 << q,
                Pauli::Z => z |= 1 << q,
                Pauli::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                    ny += 1;
                }
            }
        }
        let phase = C64::new(0.0, 1.0).powu(ny);
        let mut acc = C64::new(0.0, 0.0);
        for (i, a) in self.amps.iter().enumerate() {
            let sign = if (i & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.amps[i ^ x].conj() * *a * sign;
        }
        (acc * phase).re
    }
}

fn check_observable(obs: &Observable, n: usize) -> Result<(), SimError> {
    obs.check_qubits(n).map_err(|e| match e {
        crate::circuit::CircuitError::QubitOutOfRange { qubit, num_qubits } => {
            SimError::ObservableOutOfRange { qubit, num_qubits }
        }
        other => SimError::Config(other.to_string()),
    })
}

/// Final state of a circuit whose measurements are all terminal.
pub fn final_state(c: &Circuit) -> Result<StateVector, SimError> {
    let mut psi = StateVector::new(c.num_qubits())?;
    let gates = c.gates();
    for (t, g) in gates.iter().enumerate() {
        if g.kind() == GateKind::Measure {
            let q = g.qubits()[0];
            if gates[t + 1..].iter().any(|h| h.kind() != GateKind::Barrier && h.qubits().contains(&q)) {
                return Err(SimError::MidCircuitMeasure { qubit: q });
            }
        }
        psi.apply(g);
    }
    Ok(psi)
}

/// `⟨ψ|O|ψ⟩` for the state prepared by `c` from `|0…0⟩`.
pub fn exact_expectation(c: &Circuit, obs: &Observable) -> Result<f64, SimError> {
    check_observable(obs, c.num_qubits())?;
    let psi = final_state(c)?;
    Ok(obs.terms.iter().map(|(w, p)| w * psi.pauli_expectation(p)).sum())
}

/// Values `Σ_outcomes Π_{slots in mask} (±1) · ⟨ψ_outcome|P|ψ_outcome⟩` for a
/// circuit whose `Measure` gates are numbered as slots in circuit order.
///
/// Measurements on qubits that are never touched again commute to the end;
/// when every requested string is diagonal there they are folded into the
/// observable instead of branching.
pub fn exact_variant_values(c: &Circuit, requests: &[(&PauliString, u64)]) -> Result<Vec<f64>, SimError> {
    let n = c.num_qubits();
    let gates = c.gates();
    let mut slot_of_gate = vec![usize::MAX; gates.len()];
    let mut deferred: Vec<Option<usize>> = Vec::new();
    for (t, g) in gates.iter().enumerate() {
        if g.kind() == GateKind::Measure {
            let q = g.qubits()[0];
            slot_of_gate[t] = deferred.len();
            let untouched = !gates[t + 1..].iter().any(|h| h.kind() != GateKind::Barrier && h.qubits().contains(&q));
            let diagonal = requests.iter().all(|(p, _)| p.0.get(&q).is_none_or(|x| *x == Pauli::Z));
            deferred.push(if untouched && diagonal { Some(q) } else { None });
        }
    }
    let mut branches: Vec<(StateVector, u64)> = vec![(StateVector::new(n)?, 0)];
    for (t, g) in gates.iter().enumerate() {
        if g.kind() == GateKind::Measure {
            let slot = slot_of_gate[t];
            if deferred[slot].is_some() {
                continue;
            }
            let q = g.qubits()[0];
            let mut next = Vec::with_capacity(branches.len() * 2);
            for (psi, bits) in branches {
                let mut one = psi.clone();
                one.project(q, true);
                let mut zero = psi;
                zero.project(q, false);
                if zero.norm_sqr() > 1e-28 {
                    next.push((zero, bits));
                }
                if one.norm_sqr() > 1e-28 {
                    next.push((one, bits | 1 << slot));
                }
            }
            branches = next;
        } else {
            for (psi, _) in &mut branches {
                psi.apply(g);
            }
        }
    }
    let mut out = Vec::with_capacity(requests.len());
    for &(p, mask) in requests {
        let mut p = p.clone();
        let mut branch_mask = mask;
        for (slot, d) in deferred.iter().enumerate() {
            if let Some(q) = d {
                if mask >> slot & 1 == 1 {
                    branch_mask &= !(1 << slot);
                    if p.0.remove(q).is_none() {
                        p.0.insert(*q, Pauli::Z);
                    }
                }
            }
        }
        let v: f64 = branches
            .iter()
            .map(|(psi, bits)| {
                let sign = if (bits & branch_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sign * psi.pauli_expectation(&p)
            })
            .sum();
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn basic_expectations() {
        let empty = Circuit::new("e", 3);
        assert!(close(exact_expectation(&empty, &Observable::mean_z(3)).unwrap(), 1.0));
        let h = Circuit::from_gates("h", 1, vec![Gate::single(GateKind::H, 0)]).unwrap();
        assert!(close(exact_expectation(&h, &Observable::single(1.0, PauliString::z(0))).unwrap(), 0.0));
        let bell = Circuit::from_gates("b", 2, vec![Gate::single(GateKind::H, 0), Gate::cx(0, 1)]).unwrap();
        assert!(close(exact_expectation(&bell, &Observable::single(1.0, PauliString::zz(0, 1))).unwrap(), 1.0));
        let yy = PauliString([(0, Pauli::Y), (1, Pauli::Y)].into_iter().collect());
        assert!(close(exact_expectation(&bell, &Observable::single(1.0, yy)).unwrap(), -1.0));
    }

    #[test]
    fn rzz_matches_cx_rz_cx() {
        let a = Circuit::from_gates(
            "a",
            2,
            vec![Gate::single(GateKind::H, 0), Gate::single(GateKind::H, 1), Gate::rzz(0.9, 0, 1)],
        )
        .unwrap();
        let b = crate::cut::lower_for_cutting(&a);
        let x = PauliString::single(0, Pauli::X);
        let oa = exact_expectation(&a, &Observable::single(1.0, x.clone())).unwrap();
        let ob = exact_expectation(&b, &Observable::single(1.0, x)).unwrap();
        assert!(close(oa, ob));
        assert!(close(oa, 0.9f64.cos()));
    }

    #[test]
    fn cap_and_mid_circuit_measure() {
        assert!(matches!(StateVector::new(15), Err(SimError::CapExceeded { .. })));
        let c = Circuit::from_gates("m", 1, vec![Gate::measure(0), Gate::single(GateKind::H, 0)]).unwrap();
        assert!(exact_expectation(&c, &Observable::mean_z(1)).is_err());
    }

    #[test]
    fn branching_measurement_signs() {
        // H, signed measure, H: E[m · Z] where m is the mid-circuit outcome.
        let c = Circuit::from_gates(
            "m",
            1,
            vec![Gate::single(GateKind::H, 0), Gate::measure(0), Gate::single(GateKind::H, 0)],
        )
        .unwrap();
        let id = PauliString::identity();
        let x = PauliString::single(0, Pauli::X);
        let v = exact_variant_values(&c, &[(&id, 0), (&id, 1), (&x, 1)]).unwrap();
        assert!(close(v[0], 1.0));
        assert!(close(v[1], 0.0));
        // After H the post-measurement states are |+⟩ and |−⟩, so m·X has mean 1.
        assert!(close(v[2], 1.0));
    }

    #[test]
    fn deferred_measurement_folds_into_observable() {
        let c =
            Circuit::from_gates("d", 2, vec![Gate::single(GateKind::X, 0), Gate::cx(0, 1), Gate::measure(0)]).unwrap();
        let z1 = PauliString::z(1);
        let v = exact_variant_values(&c, &[(&z1, 1), (&z1, 0)]).unwrap();
        assert!(close(v[0], 1.0));
        assert!(close(v[1], -1.0));
    }
}
