use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::netcore::{all_pairs, pair, Pair};

/// Known quantities of an unknown network: which boundary nodes can be
/// probed, the resistance distances between them, the Kirchhoff index and
/// the conductance bounds. Node indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    n_b: usize,
    n_i: usize,
    available: Vec<usize>,
    distances: BTreeMap<Pair, f64>,
    kirchhoff_index: f64,
    gamma_min: f64,
    gamma_max: f64,
}

impl MeasurementSet {
    /// Every pair of available nodes must have exactly one distance.
    pub fn new(
        n_b: usize,
        n_i: usize,
        available: impl IntoIterator<Item = usize>,
        distances: impl IntoIterator<Item = (usize, usize, f64)>,
        kirchhoff_index: f64,
        gamma_min: f64,
        gamma_max: f64,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidMeasurements(m));
        if n_b < 2 {
            return bad(format!("need at least 2 boundary nodes, got {n_b}"));
        }
        let mut av: Vec<usize> = available.into_iter().collect();
        av.sort_unstable();
        av.dedup();
        if let Some(&x) = av.iter().find(|&&x| x >= n_b) {
            return bad(format!("available node {x} is not a boundary node"));
        }
        let mut d = BTreeMap::new();
        for (i, j, v) in distances {
            if i == j {
                return bad(format!("distance from node {i} to itself"));
            }
            if !(av.binary_search(&i).is_ok() && av.binary_search(&j).is_ok()) {
                return bad(format!("distance ({i}, {j}) involves an unavailable node"));
            }
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("distance ({i}, {j}) = {v} is not a positive number"));
            }
            if d.insert(pair(i, j), v).is_some() {
                return bad(format!("distance ({i}, {j}) given twice"));
            }
        }
        for (a, b) in all_pairs(av.len()) {
            if !d.contains_key(&(av[a], av[b])) {
                return bad(format!("missing distance ({}, {})", av[a], av[b]));
            }
        }
        if !(kirchhoff_index.is_finite() && kirchhoff_index > 0.0) {
            return bad(format!("Kirchhoff index {kirchhoff_index} is not positive"));
        }
        if !(gamma_min > 0.0 && gamma_min <= gamma_max && gamma_max.is_finite()) {
            return bad(format!("conductance bounds [{gamma_min}, {gamma_max}] are invalid"));
        }
        Ok(Self { n_b, n_i, available: av, distances: d, kirchhoff_index, gamma_min, gamma_max })
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn n_i(&self) -> usize {
        self.n_i
    }

    pub fn node_count(&self) -> usize {
        self.n_b + self.n_i
    }

    pub fn available(&self) -> &[usize] {
        &self.available
    }

    /// Boundary nodes that cannot be probed.
    pub fn unavailable(&self) -> Vec<usize> {
        (0..self.n_b).filter(|i| !self.is_available(*i)).collect()
    }

    pub fn is_available(&self, node: usize) -> bool {
        self.available.binary_search(&node).is_ok()
    }

    pub fn distances(&self) -> &BTreeMap<Pair, f64> {
        &self.distances
    }

    pub fn distance(&self, i: usize, j: usize) -> Option<f64> {
        self.distances.get(&pair(i, j)).copied()
    }

    pub fn kirchhoff_index(&self) -> f64 {
        self.kirchhoff_index
    }

    pub fn gamma_min(&self) -> f64 {
        self.gamma_min
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    /// Largest admissible edge resistance, `1 / gamma_min`.
    pub fn r_max(&self) -> f64 {
        1.0 / self.gamma_min
    }

    pub fn max_distance(&self) -> f64 {
        self.distances.values().copied().fold(0.0, f64::max)
    }

    /// All boundary pairs in lexicographic order.
    pub fn boundary_pairs(&self) -> Vec<Pair> {
        all_pairs(self.n_b)
    }

    /// Copy with every pair of `nodes` measured from `r` (a full distance
    /// matrix).
    pub fn fully_measured(&self, r: &nalgebra::DMatrix<f64>, nodes: &[usize]) -> Result<Self> {
        let mut d = Vec::new();
        for (a, b) in all_pairs(nodes.len()) {
            d.push((nodes[a], nodes[b], r[(nodes[a], nodes[b])]));
        }
        Self::new(self.n_b, self.n_i, nodes.iter().copied(), d, self.kirchhoff_index, self.gamma_min, self.gamma_max)
    }
}
