//! Z-score puncturing of a coupling map into low-noise islands.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hardware::{CalibrationSnapshot, Edge};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PunctureError {
    #[error("z threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
    #[error("punctured map has no components")]
    NoComponents,
}

/// Keys whose value lies strictly more than `z` population standard
/// deviations above the mean. A constant input has no outliers.
pub fn zscore_outliers<K: Ord + Clone>(values: &BTreeMap<K, f64>, z: f64) -> BTreeSet<K> {
    if values.is_empty() {
        return BTreeSet::new();
    }
    let n = values.len() as f64;
    let mean = values.values().sum::<f64>() / n;
    let var = values.values().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sigma = var.sqrt();
    let first = *values.values().next().unwrap();
    if sigma == 0.0 || !sigma.is_finite() || values.values().all(|&x| x == first) {
        return BTreeSet::new();
    }
    values.iter().filter(|(_, &x)| (x - mean) / sigma > z).map(|(k, _)| k.clone()).collect()
}

/// Connected island of the punctured map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: usize,
    pub qubits: BTreeSet<usize>,
    pub size: usize,
    pub edges: BTreeSet<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuncturedMap {
    pub retained_qubits: BTreeSet<usize>,
    pub retained_edges: BTreeSet<Edge>,
    pub removed_qubits: BTreeSet<usize>,
    pub removed_edges: BTreeSet<Edge>,
    /// Ordered by smallest member qubit.
    pub components: Vec<Component>,
}

impl PuncturedMap {
    /// The whole map as a single island (no puncturing).
    pub fn whole(snap: &CalibrationSnapshot) -> PuncturedMap {
        let qubits: BTreeSet<usize> = (0..snap.num_qubits()).collect();
        let edges = snap.coupling.edges.clone();
        PuncturedMap {
            components: vec![Component { id: 0, size: qubits.len(), qubits: qubits.clone(), edges: edges.clone() }],
            retained_qubits: qubits,
            retained_edges: edges,
            removed_qubits: BTreeSet::new(),
            removed_edges: BTreeSet::new(),
        }
    }

    pub fn component_sizes(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.size).collect()
    }
}

fn check_z(z: f64) -> Result<(), PunctureError> {
    if z.is_finite() && z > 0.0 {
        Ok(())
    } else {
        Err(PunctureError::InvalidThreshold(z))
    }
}

/// Remove outlier qubits and edges, then dangling edges and isolated qubits,
/// and split what remains into connected components.
pub fn puncture(snap: &CalibrationSnapshot, z_v: f64, z_e: f64) -> Result<PuncturedMap, PunctureError> {
    check_z(z_v)?;
    check_z(z_e)?;
    let n = snap.num_qubits();
    let qubit_vals: BTreeMap<usize, f64> = (0..n).map(|q| (q, snap.noise.qubit_error(q))).collect();
    let bad_qubits = zscore_outliers(&qubit_vals, z_v);
    let bad_edges = zscore_outliers(&snap.noise.cx_error, z_e);

    let mut retained_qubits: BTreeSet<usize> = (0..n).filter(|q| !bad_qubits.contains(q)).collect();
    let mut retained_edges: BTreeSet<Edge> = snap
        .coupling
        .edges
        .iter()
        .copied()
        .filter(|e| !bad_edges.contains(e) && retained_qubits.contains(&e.0) && retained_qubits.contains(&e.1))
        .collect();

    // A lone physical qubit with no couplings is kept as its own island.
    if !(n == 1 && snap.coupling.edges.is_empty()) {
        let mut degree: BTreeMap<usize, usize> = retained_qubits.iter().map(|&q| (q, 0)).collect();
        for &(a, b) in &retained_edges {
            *degree.get_mut(&a).unwrap() += 1;
            *degree.get_mut(&b).unwrap() += 1;
        }
        retained_qubits.retain(|q| degree[q] > 0);
        retained_edges.retain(|(a, b)| retained_qubits.contains(a) && retained_qubits.contains(b));
    }

    let removed_qubits = (0..n).filter(|q| !retained_qubits.contains(q)).collect();
    let removed_edges = snap.coupling.edges.iter().copied().filter(|e| !retained_edges.contains(e)).collect();
    let components = snap
        .coupling
        .components_within(&retained_qubits, &retained_edges)
        .into_iter()
        .enumerate()
        .map(|(id, qubits)| {
            let edges = retained_edges.iter().copied().filter(|(a, _)| qubits.contains(a)).collect();
            Component { id, size: qubits.len(), qubits, edges }
        })
        .collect();
    Ok(PuncturedMap { retained_qubits, retained_edges, removed_qubits, removed_edges, components })
}

/// Every integer from the smallest to the largest component size.
pub fn candidate_constraints(p: &PuncturedMap) -> Result<Vec<usize>, PunctureError> {
    let sizes = p.component_sizes();
    let lo = sizes.iter().copied().min().ok_or(PunctureError::NoComponents)?;
    let hi = sizes.iter().copied().max().unwrap();
    Ok((lo..=hi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardware::{CouplingMap, NoiseProfile};

    fn snapshot(n: usize, edges: &[(usize, usize)], cx: &[f64], readout: &[f64]) -> CalibrationSnapshot {
        let map = CouplingMap::new(n, edges.iter().copied());
        let mut noise = NoiseProfile::uniform(&map, 0.02, 0.0, 0.01);
        for (&(a, b), &e) in edges.iter().zip(cx) {
            noise.cx_error.insert(crate::hardware::edge(a, b), e);
        }
        if !readout.is_empty() {
            noise.readout_error = readout.to_vec();
        }
        CalibrationSnapshot::new(map, noise, "t").unwrap()
    }

    #[test]
    fn constant_values_have_no_outliers() {
        let v: BTreeMap<usize, f64> = (0..5).map(|i| (i, 0.3)).collect();
        assert!(zscore_outliers(&v, 0.01).is_empty());
    }

    #[test]
    fn single_spike() {
        let mut v: BTreeMap<usize, f64> = (0..9).map(|i| (i, 0.01)).collect();
        v.insert(9, 0.10);
        assert_eq!(zscore_outliers(&v, 2.0), BTreeSet::from([9]));
    }

    #[test]
    fn uniform_map_is_untouched() {
        let s = snapshot(4, &[(0, 1), (1, 2), (2, 3)], &[0.01; 3], &[]);
        let p = puncture(&s, 0.05, 0.05).unwrap();
        assert_eq!(p, PuncturedMap::whole(&s));
    }

    #[test]
    fn bad_edge_strands_endpoint() {
        let s = snapshot(3, &[(0, 1), (1, 2)], &[0.01, 0.2], &[]);
        let p = puncture(&s, 1.0, 0.5).unwrap();
        assert_eq!(p.components.len(), 1);
        assert_eq!(p.components[0].qubits, BTreeSet::from([0, 1]));
        assert_eq!(p.removed_qubits, BTreeSet::from([2]));
        assert_eq!(candidate_constraints(&p).unwrap(), vec![2]);
    }

    #[test]
    fn barbell_cut_vertex() {
        // Two triangles joined through qubit 3.
        let edges = [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 6)];
        let mut readout = vec![0.02; 7];
        readout[3] = 0.5;
        let s = snapshot(7, &edges, &[0.01; 8], &readout);
        let p = puncture(&s, 2.0, 10.0).unwrap();
        assert_eq!(p.removed_qubits, BTreeSet::from([3]));
        assert_eq!(p.component_sizes(), vec![3, 3]);
        assert!(!p.retained_edges.contains(&(2, 3)));
    }

    #[test]
    fn constraint_ranges() {
        let mut p = PuncturedMap::whole(&snapshot(2, &[(0, 1)], &[0.01], &[]));
        p.components[0].size = 7;
        assert_eq!(candidate_constraints(&p).unwrap(), vec![7]);
        let mut q = p.clone();
        q.components[0].size = 4;
        let mut second = q.components[0].clone();
        second.size = 9;
        q.components.push(second);
        assert_eq!(candidate_constraints(&q).unwrap(), vec![4, 5, 6, 7, 8, 9]);
        q.components.clear();
        assert_eq!(candidate_constraints(&q), Err(PunctureError::NoComponents));
    }

    #[test]
    fn rejects_bad_threshold() {
        let s = snapshot(2, &[(0, 1)], &[0.01], &[]);
        assert!(puncture(&s, 0.0, 1.0).is_err());
        assert!(puncture(&s, 1.0, f64::NAN).is_err());
    }
}
