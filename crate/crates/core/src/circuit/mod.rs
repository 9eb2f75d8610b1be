//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered list of [`Gate`]s over logical qubits
//! `0..num_qubits`. Gates are validated on construction, so every circuit
//! value upholds the arity, parameter-count and qubit-range invariants.

pub mod generators;
pub mod qasm;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("gate {kind} expects {expected} qubit(s), got {got}")]
    Arity { kind: GateKind, expected: usize, got: usize },
    #[error("gate {kind} expects {expected} parameter(s), got {got}")]
    Params { kind: GateKind, expected: usize, got: usize },
    #[error("gate {kind} repeats qubit {qubit}")]
    RepeatedQubit { kind: GateKind, qubit: usize },
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("non-finite parameter in gate {kind}")]
    NonFinite { kind: GateKind },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Supported gate kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rz,
    Rx,
    Cx,
    Cz,
    Rzz,
    Swap,
    Measure,
    Barrier,
}

impl GateKind {
    /// Required qubit count, or `None` for the variadic barrier.
    pub fn arity(self) -> Option<usize> {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::Rzz | GateKind::Swap => Some(2),
            GateKind::Barrier => None,
            _ => Some(1),
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            GateKind::Rz | GateKind::Rx | GateKind::Rzz => 1,
            _ => 0,
        }
    }

    pub fn is_two_qubit(self) -> bool {
        self.arity() == Some(2)
    }

    /// Single-qubit unitary (excludes measurement and barrier).
    pub fn is_single_qubit_unitary(self) -> bool {
        self.arity() == Some(1) && self != GateKind::Measure
    }

    /// Lower-case OpenQASM 2 mnemonic.
    pub fn qasm_name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Rz => "rz",
            GateKind::Rx => "rx",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::Rzz => "rzz",
            GateKind::Swap => "swap",
            GateKind::Measure => "measure",
            GateKind::Barrier => "barrier",
        }
    }

    pub fn from_qasm_name(name: &str) -> Option<GateKind> {
        Some(match name {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            "rz" => GateKind::Rz,
            "rx" => GateKind::Rx,
            "cx" | "CX" => GateKind::Cx,
            "cz" => GateKind::Cz,
            "rzz" => GateKind::Rzz,
            "swap" => GateKind::Swap,
            "measure" => GateKind::Measure,
            "barrier" => GateKind::Barrier,
            _ => return None,
        })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.qasm_name())
    }
}

/// One operation of a circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGate")]
pub struct Gate {
    kind: GateKind,
    qubits: Vec<usize>,
    params: Vec<f64>,
}

#[derive(Deserialize)]
struct RawGate {
    kind: GateKind,
    qubits: Vec<usize>,
    #[serde(default)]
    params: Vec<f64>,
}

impl TryFrom<RawGate> for Gate {
    type Error = CircuitError;

    fn try_from(raw: RawGate) -> Result<Self, Self::Error> {
        Gate::new(raw.kind, raw.qubits, raw.params)
    }
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Vec<f64>) -> Result<Gate, CircuitError> {
        match kind.arity() {
            Some(n) if n != qubits.len() => return Err(CircuitError::Arity { kind, expected: n, got: qubits.len() }),
            None if qubits.is_empty() => return Err(CircuitError::Arity { kind, expected: 1, got: 0 }),
            _ => {}
        }
        if params.len() != kind.num_params() {
            return Err(CircuitError::Params { kind, expected: kind.num_params(), got: params.len() });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(CircuitError::NonFinite { kind });
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(CircuitError::RepeatedQubit { kind, qubit: *q });
            }
        }
        Ok(Gate { kind, qubits, params })
    }

    /// Parameterless single-qubit gate or measurement. Panics on a kind that
    /// needs parameters or two qubits.
    pub fn single(kind: GateKind, q: usize) -> Gate {
        assert!(kind.arity() == Some(1) && kind.num_params() == 0, "{kind} is not a plain single-qubit op");
        Gate { kind, qubits: vec![q], params: Vec::new() }
    }

    pub fn measure(q: usize) -> Gate {
        Gate::single(GateKind::Measure, q)
    }

    pub fn rz(theta: f64, q: usize) -> Gate {
        Gate { kind: GateKind::Rz, qubits: vec![q], params: vec![theta] }
    }

    pub fn rx(theta: f64, q: usize) -> Gate {
        Gate { kind: GateKind::Rx, qubits: vec![q], params: vec![theta] }
    }

    /// Parameterless two-qubit gate (CX, CZ, SWAP).
    pub fn pair(kind: GateKind, a: usize, b: usize) -> Gate {
        assert!(kind.is_two_qubit() && kind.num_params() == 0, "{kind} is not a plain two-qubit gate");
        assert_ne!(a, b, "two-qubit gate on a single qubit");
        Gate { kind, qubits: vec![a, b], params: Vec::new() }
    }

    pub fn cx(control: usize, target: usize) -> Gate {
        Gate::pair(GateKind::Cx, control, target)
    }

    pub fn cz(a: usize, b: usize) -> Gate {
        Gate::pair(GateKind::Cz, a, b)
    }

    pub fn rzz(theta: f64, a: usize, b: usize) -> Gate {
        assert_ne!(a, b, "rzz on a single qubit");
        Gate { kind: GateKind::Rzz, qubits: vec![a, b], params: vec![theta] }
    }

    pub fn barrier(qubits: Vec<usize>) -> Gate {
        Gate { kind: GateKind::Barrier, qubits, params: Vec::new() }
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// The angle of a parameterised gate.
    pub fn angle(&self) -> Option<f64> {
        self.params.first().copied()
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.is_two_qubit()
    }

    /// Same gate acting on remapped qubits.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        Gate { kind: self.kind, qubits: self.qubits.iter().map(|&q| map(q)).collect(), params: self.params.clone() }
    }

    /// Inverse gate. Measurements and barriers are their own "inverse".
    pub fn inverse(&self) -> Gate {
        let kind = match self.kind {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            k => k,
        };
        Gate { kind, qubits: self.qubits.clone(), params: self.params.iter().map(|p| -p).collect() }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
            write!(f, "({})", ps.join(","))?;
        }
        let qs: Vec<String> = self.qubits.iter().map(|q| q.to_string()).collect();
        write!(f, " {}", qs.join(","))
    }
}

/// Ordered gate list over `num_qubits` logical qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct Circuit {
    name: String,
    num_qubits: usize,
    gates: Vec<Gate>,
}

#[derive(Deserialize)]
struct RawCircuit {
    #[serde(default)]
    name: String,
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl TryFrom<RawCircuit> for Circuit {
    type Error = CircuitError;

    fn try_from(raw: RawCircuit) -> Result<Self, Self::Error> {
        Circuit::from_gates(raw.name, raw.num_qubits, raw.gates)
    }
}

impl Circuit {
    pub fn new(name: impl Into<String>, num_qubits: usize) -> Circuit {
        Circuit { name: name.into(), num_qubits, gates: Vec::new() }
    }

    pub fn from_gates(name: impl Into<String>, num_qubits: usize, gates: Vec<Gate>) -> Result<Circuit, CircuitError> {
        let mut c = Circuit::new(name, num_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(CircuitError::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits });
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Push a gate the caller knows is in range.
    pub(crate) fn push_unchecked(&mut self, gate: Gate) {
        debug_assert!(gate.qubits.iter().all(|&q| q < self.num_qubits));
        self.gates.push(gate);
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    /// The circuit followed by its inverse.
    pub fn mirrored(&self) -> Circuit {
        let mut out = self.clone();
        for g in self.gates.iter().rev() {
            out.gates.push(g.inverse());
        }
        out
    }

    /// Gate indices acting on each qubit, in program order.
    pub fn wire_gates(&self) -> Vec<Vec<usize>> {
        let mut wires = vec![Vec::new(); self.num_qubits];
        for (i, g) in self.gates.iter().enumerate() {
            for &q in &g.qubits {
                wires[q].push(i);
            }
        }
        wires
    }

    /// Rewrite every gate with `f`, which returns the replacement sequence.
    pub fn flat_map(&self, mut f: impl FnMut(&Gate) -> Vec<Gate>) -> Circuit {
        let mut out = Circuit::new(self.name.clone(), self.num_qubits);
        for g in &self.gates {
            for h in f(g) {
                out.push_unchecked(h);
            }
        }
        out
    }

    pub fn interaction_graph(&self) -> InteractionGraph {
        interaction_graph(self)
    }
}

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Tensor product of Paulis on a subset of qubits; identity elsewhere.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString(pub BTreeMap<usize, Pauli>);

impl PauliString {
    pub fn identity() -> PauliString {
        PauliString(BTreeMap::new())
    }

    pub fn z(q: usize) -> PauliString {
        PauliString([(q, Pauli::Z)].into_iter().collect())
    }

    pub fn zz(a: usize, b: usize) -> PauliString {
        PauliString([(a, Pauli::Z), (b, Pauli::Z)].into_iter().collect())
    }

    pub fn single(q: usize, p: Pauli) -> PauliString {
        PauliString([(q, p)].into_iter().collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// True when every factor is `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.0.values().all(|p| *p == Pauli::Z)
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.0.keys().next_back().copied()
    }
}

/// Real-weighted sum of Pauli strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub terms: Vec<(f64, PauliString)>,
}

impl Observable {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Observable {
        Observable { terms }
    }

    /// `(1/n) Σ Z_i`, the default observable.
    pub fn mean_z(n: usize) -> Observable {
        let w = 1.0 / n as f64;
        Observable { terms: (0..n).map(|q| (w, PauliString::z(q))).collect() }
    }

    pub fn single(coefficient: f64, p: PauliString) -> Observable {
        Observable { terms: vec![(coefficient, p)] }
    }

    pub fn check_qubits(&self, num_qubits: usize) -> Result<(), CircuitError> {
        for (_, p) in &self.terms {
            if let Some(q) = p.max_qubit().filter(|&q| q >= num_qubits) {
                return Err(CircuitError::QubitOutOfRange { qubit: q, num_qubits });
            }
        }
        Ok(())
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.is_diagonal())
    }
}

/// Logical qubits joined by weighted edges (count of two-qubit gates).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InteractionGraph {
    pub num_qubits: usize,
    pub edges: BTreeMap<(usize, usize), usize>,
}

impl InteractionGraph {
    pub fn degree(&self, q: usize) -> usize {
        self.edges.keys().filter(|(a, b)| *a == q || *b == q).count()
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        self.edges
            .keys()
            .filter_map(|&(a, b)| {
                if a == q {
                    Some(b)
                } else if b == q {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn total_weight(&self) -> usize {
        self.edges.values().sum()
    }
}

pub fn interaction_graph(c: &Circuit) -> InteractionGraph {
    let mut edges = BTreeMap::new();
    for g in c.gates() {
        if g.is_two_qubit() {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    InteractionGraph { num_qubits: c.num_qubits(), edges }
}
