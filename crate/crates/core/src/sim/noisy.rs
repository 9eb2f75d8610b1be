//! Shot-based simulation with stochastic Pauli errors and readout flips.
//!
//! Every single-qubit gate is followed, with the qubit's `sx_error`
//! probability, by a uniformly drawn X, Y or Z. Every two-qubit gate is
//! followed, with its edge's `cx_error` probability, by one of the 15
//! non-identity two-qubit Paulis. Every recorded bit flips with the readout
//! error of its physical qubit.
//!
//! Shots run in chunks of [`CHUNK`]; chunk `k` draws from a ChaCha8 stream
//! seeded with `seed` on stream `k`, so results do not depend on `jobs`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{SimError, StateVector};
use crate::circuit::{Circuit, GateKind, Observable, Pauli};
use crate::hardware::NoiseProfile;
use crate::layout::Layout;
use crate::qpd::Estimate;

pub const CHUNK: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyConfig {
    pub shots: u64,
    pub seed: u64,
    pub readout_flips: bool,
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
}

impl Default for NoisyConfig {
    fn default() -> Self {
        NoisyConfig { shots: 4096, seed: 0, readout_flips: true, jobs: 0 }
    }
}

/// A circuit bound to physical error rates, ready for sampling.
#[derive(Debug, Clone)]
pub struct NoisyProgram {
    circuit: Circuit,
    /// Pauli error probability after each gate.
    error: Vec<f64>,
    slot_qubit: Vec<usize>,
    slot_deferred: Vec<bool>,
    slot_of_gate: Vec<usize>,
    readout: Vec<f64>,
    /// Slot whose bit is the qubit's final record, if its last op is a measurement.
    final_slot: Vec<Option<usize>>,
    /// Cumulative ideal output distribution, when nothing needs branching.
    ideal_cdf: Option<Vec<f64>>,
}

impl NoisyProgram {
    /// `physical[i]` is the device qubit that local qubit `i` runs on.
    pub fn new(circuit: &Circuit, physical: &[usize], noise: &NoiseProfile) -> Result<NoisyProgram, SimError> {
        let n = circuit.num_qubits();
        if physical.len() != n {
            return Err(SimError::Config(format!("{} physical qubits given for a {n}-qubit circuit", physical.len())));
        }
        StateVector::new(n)?;
        let phys = |q: usize, t: usize| -> Result<usize, SimError> {
            let p = physical[q];
            if p >= noise.readout_error.len() {
                return Err(SimError::UnmappedOp { gate: t, what: format!("qubit {p}") });
            }
            Ok(p)
        };
        let gates = circuit.gates();
        let mut error = Vec::with_capacity(gates.len());
        let mut slot_qubit = Vec::new();
        let mut slot_deferred = Vec::new();
        let mut slot_of_gate = vec![usize::MAX; gates.len()];
        let mut final_slot = vec![None; n];
        for (t, g) in gates.iter().enumerate() {
            let q = g.qubits();
            let p = match g.kind() {
                GateKind::Barrier => 0.0,
                GateKind::Measure => {
                    phys(q[0], t)?;
                    slot_of_gate[t] = slot_qubit.len();
                    let untouched =
                        !gates[t + 1..].iter().any(|h| h.kind() != GateKind::Barrier && h.qubits().contains(&q[0]));
                    if untouched {
                        final_slot[q[0]] = Some(slot_qubit.len());
                    }
                    slot_qubit.push(q[0]);
                    slot_deferred.push(untouched);
                    0.0
                }
                _ if g.is_two_qubit() => {
                    let (a, b) = (phys(q[0], t)?, phys(q[1], t)?);
                    noise
                        .edge_error(a, b)
                        .ok_or_else(|| SimError::UnmappedOp { gate: t, what: format!("edge ({a}, {b})") })?
                }
                _ => noise.sx_error[phys(q[0], t)?],
            };
            error.push(p);
        }
        if slot_qubit.len() > 64 {
            return Err(SimError::Config(format!("{} measurements exceed 64", slot_qubit.len())));
        }
        let readout = (0..n).map(|q| noise.readout_error.get(physical[q]).copied().unwrap_or(0.0)).collect();
        let ideal_cdf = if slot_deferred.iter().all(|&d| d) {
            let mut psi = StateVector::new(n)?;
            for g in gates {
                psi.apply(g);
            }
            Some(cdf(&psi))
        } else {
            None
        };
        Ok(NoisyProgram {
            circuit: circuit.clone(),
            error,
            slot_qubit,
            slot_deferred,
            slot_of_gate,
            readout,
            final_slot,
            ideal_cdf,
        })
    }

    pub fn num_slots(&self) -> usize {
        self.slot_qubit.len()
    }

    /// One shot: (measurement-slot bits, final per-qubit record bits).
    fn shot(&self, rng: &mut ChaCha8Rng, readout_flips: bool) -> (u64, u64) {
        let mut events: Vec<(usize, u8)> = Vec::new();
        for (t, &p) in self.error.iter().enumerate() {
            if p > 0.0 && rng.gen::<f64>() < p {
                let k =
                    if self.circuit.gates()[t].is_two_qubit() { rng.gen_range(1..16u8) } else { rng.gen_range(1..4u8) };
                events.push((t, k));
            }
        }
        let mut slots = 0u64;
        let outcome = match (&self.ideal_cdf, events.is_empty()) {
            (Some(c), true) => sample(c, rng.gen()),
            _ => {
                let mut psi = StateVector::new(self.circuit.num_qubits()).expect("checked at build");
                let mut next = events.iter().peekable();
                for (t, g) in self.circuit.gates().iter().enumerate() {
                    if g.kind() == GateKind::Measure {
                        let s = self.slot_of_gate[t];
                        if !self.slot_deferred[s] {
                            let q = g.qubits()[0];
                            let p1 = psi.prob_one(q) / psi.norm_sqr();
                            let one = rng.gen::<f64>() < p1;
                            psi.project(q, one);
                            psi.scale(1.0 / psi.norm_sqr().sqrt());
                            if one {
                                slots |= 1 << s;
                            }
                        }
                    } else {
                        psi.apply(g);
                    }
                    while let Some(&&(te, k)) = next.peek() {
                        if te != t {
                            break;
                        }
                        next.next();
                        let q = g.qubits();
                        if g.is_two_qubit() {
                            apply_index(&mut psi, q[0], k & 3);
                            apply_index(&mut psi, q[1], k >> 2);
                        } else {
                            apply_index(&mut psi, q[0], k);
                        }
                    }
                }
                sample(&cdf(&psi), rng.gen())
            }
        };
        for (s, &q) in self.slot_qubit.iter().enumerate() {
            if self.slot_deferred[s] && outcome >> q & 1 == 1 {
                slots |= 1 << s;
            }
        }
        if readout_flips {
            for (s, &q) in self.slot_qubit.iter().enumerate() {
                if rng.gen::<f64>() < self.readout[q] {
                    slots ^= 1 << s;
                }
            }
        }
        let mut record = 0u64;
        for q in 0..self.circuit.num_qubits() {
            let bit = match self.final_slot[q] {
                Some(s) => slots >> s & 1 == 1,
                None => {
                    let b = outcome >> q & 1 == 1;
                    b ^ (readout_flips && rng.gen::<f64>() < self.readout[q])
                }
            };
            if bit {
                record |= 1 << q;
            }
        }
        (slots, record)
    }

    /// Recorded bits for every shot, in shot order.
    pub fn sample_shots(&self, cfg: &NoisyConfig) -> Result<Vec<(u64, u64)>, SimError> {
        if cfg.shots == 0 {
            return Err(SimError::Config("shots must be positive".into()));
        }
        let chunks = cfg.shots.div_ceil(CHUNK);
        let run = |k: u64| -> Vec<(u64, u64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k);
            let len = CHUNK.min(cfg.shots - k * CHUNK);
            (0..len).map(|_| self.shot(&mut rng, cfg.readout_flips)).collect()
        };
        let parts: Vec<Vec<(u64, u64)>> = match cfg.jobs {
            1 => (0..chunks).map(run).collect(),
            0 => (0..chunks).into_par_iter().map(run).collect(),
            j => rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| SimError::Config(e.to_string()))?
                .install(|| (0..chunks).into_par_iter().map(run).collect()),
        };
        Ok(parts.into_iter().flatten().collect())
    }
}

fn apply_index(psi: &mut StateVector, q: usize, k: u8) {
    match k {
        1 => psi.apply_pauli(q, Pauli::X),
        2 => psi.apply_pauli(q, Pauli::Y),
        3 => psi.apply_pauli(q, Pauli::Z),
        _ => {}
    }
}

fn cdf(psi: &StateVector) -> Vec<f64> {
    let mut acc = 0.0;
    psi.amplitudes()
        .iter()
        .map(|a| {
            acc += a.norm_sqr();
            acc
        })
        .collect()
}

fn sample(cdf: &[f64], u: f64) -> usize {
    let u = u * cdf.last().copied().unwrap_or(1.0);
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Mean and standard error of per-shot values.
pub fn estimate(values: impl ExactSizeIterator<Item = f64>) -> Estimate {
    let n = values.len() as f64;
    let (mut s, mut ss) = (0.0, 0.0);
    for v in values {
        s += v;
        ss += v * v;
    }
    let mean = s / n;
    let std_error = if n > 1.0 { ((ss - n * mean * mean).max(0.0) / (n - 1.0) / n).sqrt() } else { 0.0 };
    Estimate { mean, std_error }
}

fn parity(x: u64) -> f64 {
    if x.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Estimates of `Π Z_{qubit mask} · Π m_{slot mask}` for each request.
pub fn run_noisy_requests(
    prog: &NoisyProgram,
    cfg: &NoisyConfig,
    requests: &[(u64, u64)],
) -> Result<Vec<Estimate>, SimError> {
    let shots = prog.sample_shots(cfg)?;
    Ok(requests.iter().map(|&(z, m)| estimate(shots.iter().map(|&(s, r)| parity(r & z) * parity(s & m)))).collect())
}

/// Noisy estimate of a diagonal observable on the logical qubits of a laid-out circuit.
pub fn noisy_expectation(
    layout: &Layout,
    noise: &NoiseProfile,
    obs: &Observable,
    cfg: &NoisyConfig,
) -> Result<Estimate, SimError> {
    let logical = layout.final_map.len();
    let mut terms = Vec::with_capacity(obs.terms.len());
    for (w, p) in &obs.terms {
        if !p.is_diagonal() {
            return Err(SimError::NonDiagonal);
        }
        let mut mask = 0u64;
        for &q in p.0.keys() {
            if q >= logical {
                return Err(SimError::ObservableOutOfRange { qubit: q, num_qubits: logical });
            }
            mask |= 1 << layout.final_map[q];
        }
        terms.push((*w, mask));
    }
    let prog = NoisyProgram::new(&layout.routed, &layout.physical, noise)?;
    let shots = prog.sample_shots(cfg)?;
    Ok(estimate(shots.iter().map(|&(_, r)| terms.iter().map(|&(w, z)| w * parity(r & z)).sum())))
}
