//! Networks whose edge conductances are affine in a decision vector.
//!
//! Every optimization stage works on one of these: the switch network
//! (conductance = coefficient x switch), or a plain network where each
//! edge conductance is its own variable.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::netcore::{components, laplacian_from_edges, GroundedInverse, Network, Pair};

/// Edges below this conductance do not count towards connectivity.
pub const ACTIVE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEdge {
    pub u: usize,
    pub v: usize,
    /// Fixed conductance.
    pub base: f64,
    /// Driving variable and its coefficient.
    pub var: Option<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct LinearModel {
    n_nodes: usize,
    n_b: usize,
    edges: Vec<ModelEdge>,
    n_vars: usize,
    var_edge: Vec<usize>,
}

/// Distances, Kirchhoff index and their gradients at one point.
#[derive(Debug, Clone)]
pub struct ModelEval {
    pub r: Vec<f64>,
    /// `dr[p][k]`; empty unless gradients were requested.
    pub dr: Vec<Vec<f64>>,
    /// Kirchhoff index of the component holding the boundary.
    pub k: f64,
    pub dk: Vec<f64>,
    pub component_size: usize,
}

impl LinearModel {
    /// Each variable must drive exactly one edge.
    pub fn new(n_nodes: usize, n_b: usize, edges: Vec<ModelEdge>, n_vars: usize) -> Result<Self> {
        let mut var_edge = vec![usize::MAX; n_vars];
        for (idx, e) in edges.iter().enumerate() {
            if e.u >= n_nodes || e.v >= n_nodes || e.u == e.v {
                return Err(Error::InvalidNetwork(format!("bad model edge ({}, {})", e.u, e.v)));
            }
            if let Some((k, _)) = e.var {
                if k >= n_vars {
                    return Err(Error::IndexOutOfRange { index: k, size: n_vars });
                }
                if var_edge[k] != usize::MAX {
                    return Err(Error::InvalidNetwork(format!("variable {k} drives two edges")));
                }
                var_edge[k] = idx;
            }
        }
        if let Some(k) = var_edge.iter().position(|&e| e == usize::MAX) {
            return Err(Error::InvalidNetwork(format!("variable {k} drives no edge")));
        }
        Ok(Self { n_nodes, n_b, edges, n_vars, var_edge })
    }

    /// One variable per edge of `topology`, conductance equal to the variable.
    pub fn per_edge(n_nodes: usize, n_b: usize, topology: &[Pair]) -> Result<Self> {
        let edges = topology
            .iter()
            .enumerate()
            .map(|(k, &(u, v))| ModelEdge { u, v, base: 0.0, var: Some((k, 1.0)) })
            .collect();
        Self::new(n_nodes, n_b, edges, topology.len())
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn edges(&self) -> &[ModelEdge] {
        &self.edges
    }

    /// Endpoints of the edge driven by variable `k`.
    pub fn var_pair(&self, k: usize) -> Pair {
        let e = &self.edges[self.var_edge[k]];
        (e.u, e.v)
    }

    pub fn conductances(&self, v: &[f64]) -> Vec<f64> {
        self.edges.iter().map(|e| e.base + e.var.map_or(0.0, |(k, a)| a * v[k])).collect()
    }

    /// The network at `v`, keeping edges with positive conductance.
    pub fn network(&self, v: &[f64]) -> Result<Network<f64>> {
        if v.len() != self.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, actual: v.len() });
        }
        let c = self.conductances(v);
        let mut merged: std::collections::BTreeMap<Pair, f64> = std::collections::BTreeMap::new();
        for (e, g) in self.edges.iter().zip(c) {
            if g > 0.0 {
                *merged.entry(crate::netcore::pair(e.u, e.v)).or_insert(0.0) += g;
            }
        }
        Network::new(self.n_b, self.n_nodes - self.n_b, merged.into_iter().map(|((u, v), g)| (u, v, g)))
    }

    /// Evaluates boundary-pair distances (and optionally gradients) at `v`.
    /// Returns `None` when the boundary is not connected through active
    /// edges or the factorization fails.
    pub fn evaluate(&self, v: &[f64], pairs: &[Pair], gradients: bool) -> Option<ModelEval> {
        let c = self.conductances(v);
        if c.iter().any(|x| !x.is_finite() || *x < -1e-15) {
            return None;
        }
        let labels = components(
            self.n_nodes,
            self.edges.iter().zip(&c).filter(|(_, &g)| g > ACTIVE_FLOOR).map(|(e, _)| (e.u, e.v)),
        );
        let root = labels[0];
        if (0..self.n_b).any(|b| labels[b] != root) {
            return None;
        }
        let mut local = vec![usize::MAX; self.n_nodes];
        let mut n = 0;
        for (x, &l) in labels.iter().enumerate() {
            if l == root {
                local[x] = n;
                n += 1;
            }
        }
        let lap: DMatrix<f64> = laplacian_from_edges(
            n,
            self.edges
                .iter()
                .zip(&c)
                .filter(|(e, _)| local[e.u] != usize::MAX && local[e.v] != usize::MAX)
                .map(|(e, &g)| (local[e.u], local[e.v], g.max(0.0))),
        );
        let inv = GroundedInverse::from_connected(&lap).ok()?;
        let lp: Vec<Pair> = pairs.iter().map(|&(i, j)| (local[i], local[j])).collect();
        let r: Vec<f64> = lp.iter().map(|&(i, j)| inv.resistance(i, j)).collect();
        let k = inv.kirchhoff();
        if !k.is_finite() || r.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let (mut dr, mut dk) = (Vec::new(), Vec::new());
        if gradients {
            dr = vec![vec![0.0; self.n_vars]; pairs.len()];
            dk = vec![0.0; self.n_vars];
            let nf = n as f64;
            for (kv, &ei) in self.var_edge.iter().enumerate() {
                let e = &self.edges[ei];
                let (a, b) = (local[e.u], local[e.v]);
                if a == usize::MAX || b == usize::MAX {
                    continue;
                }
                let coef = e.var.unwrap().1;
                for (p, &pp) in lp.iter().enumerate() {
                    let t = inv.transfer(pp, (a, b));
                    dr[p][kv] = -coef * t * t;
                }
                dk[kv] = -coef * nf * inv.column_norm_sq((a, b));
            }
        }
        Some(ModelEval { r, dr, k, dk, component_size: n })
    }
}
