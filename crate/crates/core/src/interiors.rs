//! Stage 2: relaxed refit of the auxiliary network with a Kirchhoff term,
//! then placement of interior nodes on edges whose resistance cannot be a
//! single resistor.

use std::collections::{BTreeMap, BTreeSet};

use log::debug;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constraints;
use crate::dccp::{CcpOptions, CcpReport, Domain};
use crate::error::Result;
use crate::fit::{solve_fit, FitProblem, Targets};
use crate::measurements::MeasurementSet;
use crate::model::LinearModel;
use crate::netcore::{pair, Network, Pair};

/// Conductances below this are treated as removed edges.
pub const ZERO_CONDUCTANCE: f64 = 1e-9;
const OVERSIZE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pi2Solution {
    pub edges: Vec<Pair>,
    pub conductances: Vec<f64>,
    pub objective: f64,
    pub initial_objective: f64,
    /// Edges whose conductance fell below [`ZERO_CONDUCTANCE`].
    pub zero_edges: Vec<Pair>,
    pub report: CcpReport,
}

impl Pi2Solution {
    /// Network of the surviving edges.
    pub fn network(&self, n_b: usize) -> Result<Network<f64>> {
        Network::new(
            n_b,
            0,
            self.edges
                .iter()
                .zip(&self.conductances)
                .filter(|(_, &c)| c >= ZERO_CONDUCTANCE)
                .map(|(&(u, v), &c)| (u, v, c)),
        )
    }
}

pub fn pi2_problem(aux: &Network<f64>, ms: &MeasurementSet, estimate: &DMatrix<f64>) -> Result<FitProblem> {
    let topo = aux.pairs();
    let model = LinearModel::per_edge(ms.n_b(), ms.n_b(), &topo)?;
    Ok(FitProblem::new(
        model,
        Targets::from_measurements(ms, estimate),
        Some(ms.kirchhoff_index()),
        constraints::generate_all(ms),
        Domain::uniform(topo.len(), 0.0, f64::INFINITY),
    ))
}

/// Refits the auxiliary conductances, starting from their current values.
pub fn solve_pi2(
    aux: &Network<f64>,
    ms: &MeasurementSet,
    estimate: &DMatrix<f64>,
    opts: &CcpOptions,
) -> Result<Pi2Solution> {
    let mut problem = pi2_problem(aux, ms, estimate)?;
    let c0 = aux.conductances();
    let initial_objective =
        crate::dccp::DcProblem::evaluate(&problem, &c0, false).map_or(f64::INFINITY, |e| e.objective());
    let out = solve_fit(&mut problem, &c0, opts)?;
    let edges = aux.pairs();
    let zero_edges: Vec<Pair> =
        edges.iter().zip(&out.v).filter(|(_, &c)| c < ZERO_CONDUCTANCE).map(|(&p, _)| p).collect();
    if !zero_edges.is_empty() {
        debug!("interiors: {} edge(s) driven to zero conductance", zero_edges.len());
    }
    Ok(Pi2Solution {
        edges,
        conductances: out.v,
        objective: out.objective,
        initial_objective,
        zero_edges,
        report: out.report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub edge: Pair,
    pub node: usize,
    pub resistance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub n_b: usize,
    pub on_edge: Vec<Split>,
    pub dangling: Vec<usize>,
}

impl Placement {
    pub fn n_i(&self) -> usize {
        self.on_edge.len() + self.dangling.len()
    }
}

/// Splits the `n_i` largest resistances above `r_max` (descending, ties by
/// edge); interior nodes left over dangle. Ids follow the same order.
pub fn place(edges: &[Pair], conductances: &[f64], n_b: usize, n_i: usize, r_max: f64) -> Placement {
    let mut over: Vec<(Pair, f64)> = edges
        .iter()
        .zip(conductances)
        .filter(|(_, &c)| c >= ZERO_CONDUCTANCE)
        .map(|(&p, &c)| (p, 1.0 / c))
        .filter(|&(_, r)| r > r_max + OVERSIZE_SLACK)
        .collect();
    over.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    over.truncate(n_i);
    let on_edge: Vec<Split> =
        over.iter().enumerate().map(|(k, &(edge, resistance))| Split { edge, node: n_b + k, resistance }).collect();
    let dangling = (n_b + on_edge.len()..n_b + n_i).collect();
    debug!("stage 2: {} split(s)", on_edge.len());
    Placement { n_b, on_edge, dangling }
}

/// Auxiliary network with interior nodes inserted and fully connected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hat {
    pub n_b: usize,
    pub n_i: usize,
    /// Conductance per edge for edges coming from the auxiliary network
    /// (split edges as two halves of doubled conductance).
    pub aux_edges: BTreeMap<Pair, f64>,
    /// Added interior connections not already in `aux_edges`.
    pub extra_edges: BTreeSet<Pair>,
}

impl Hat {
    pub fn node_count(&self) -> usize {
        self.n_b + self.n_i
    }

    pub fn edges(&self) -> Vec<Pair> {
        let mut e: BTreeSet<Pair> = self.aux_edges.keys().copied().collect();
        e.extend(self.extra_edges.iter().copied());
        e.into_iter().collect()
    }

    pub fn protected(&self) -> BTreeSet<Pair> {
        self.aux_edges.keys().copied().collect()
    }

    /// Starting conductances: auxiliary values, `gamma_max` on added edges.
    pub fn initial_conductances(&self, edges: &[Pair], gamma_max: f64) -> Vec<f64> {
        edges
            .iter()
            .map(|p| {
                self.aux_edges.get(p).copied().unwrap_or(if self.extra_edges.contains(p) { gamma_max } else { 0.0 })
            })
            .collect()
    }
}

pub fn build_hat(aux: &Network<f64>, p: &Placement) -> Hat {
    let n_b = aux.n_b();
    let n_i = p.n_i();
    let mut aux_edges: BTreeMap<Pair, f64> = aux.edges().iter().map(|e| (e.pair(), e.conductance)).collect();
    for s in &p.on_edge {
        if let Some(c) = aux_edges.remove(&s.edge) {
            aux_edges.insert(pair(s.edge.0, s.node), 2.0 * c);
            aux_edges.insert(pair(s.node, s.edge.1), 2.0 * c);
        }
    }
    let n = n_b + n_i;
    let mut extra = BTreeSet::new();
    for k in n_b..n {
        for j in 0..n {
            if j != k && !aux_edges.contains_key(&pair(j, k)) {
                extra.insert(pair(j, k));
            }
        }
    }
    Hat { n_b, n_i, aux_edges, extra_edges: extra }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2Output {
    pub pi2: Pi2Solution,
    pub placement: Placement,
    pub hat: Hat,
}

pub fn run(
    aux: &Network<f64>,
    ms: &MeasurementSet,
    estimate: &DMatrix<f64>,
    opts: &CcpOptions,
) -> Result<Stage2Output> {
    let pi2 = solve_pi2(aux, ms, estimate, opts)?;
    let placement = place(&pi2.edges, &pi2.conductances, ms.n_b(), ms.n_i(), ms.r_max());
    let hat = build_hat(&pi2.network(ms.n_b())?, &placement);
    Ok(Stage2Output { pi2, placement, hat })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> (Vec<Pair>, Vec<f64>) {
        (vec![(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)], vec![1.0, 1.0 / 5.2, 1.0, 1.0, 1.0])
    }

    #[test]
    fn one_split_one_dangling() {
        let (e, c) = square();
        let p = place(&e, &c, 4, 2, 4.0);
        assert_eq!(p.on_edge, vec![Split { edge: (0, 2), node: 4, resistance: 5.2 }]);
        assert_eq!(p.dangling, vec![5]);
    }

    #[test]
    fn top_one_of_three() {
        let e = vec![(0, 1), (1, 2), (0, 2)];
        let c = vec![1.0 / 5.0, 1.0 / 9.0, 1.0 / 7.0];
        let p = place(&e, &c, 3, 1, 4.0);
        assert_eq!(p.on_edge.len(), 1);
        assert_eq!(p.on_edge[0].edge, (1, 2));
        assert!(p.dangling.is_empty());
    }

    #[test]
    fn none_oversized() {
        let e = vec![(0, 1), (1, 2)];
        let p = place(&e, &[1.0, 0.3], 3, 2, 4.0);
        assert!(p.on_edge.is_empty());
        assert_eq!(p.dangling, vec![3, 4]);
        let p = place(&e, &[1.0, 0.25], 3, 1, 4.0);
        assert!(p.on_edge.is_empty());
    }

    #[test]
    fn hat_counts() {
        let (e, c) = square();
        let aux = Network::new(4, 0, e.iter().zip(&c).map(|(&(u, v), &g)| (u, v, g))).unwrap();
        let none = build_hat(&aux, &Placement { n_b: 4, on_edge: vec![], dangling: vec![] });
        assert_eq!(none.edges(), aux.pairs());
        let two = build_hat(&aux, &Placement { n_b: 4, on_edge: vec![], dangling: vec![4, 5] });
        assert_eq!(two.extra_edges.len(), 9);
        let p = place(&e, &c, 4, 2, 4.0);
        let h = build_hat(&aux, &p);
        assert!(!h.aux_edges.contains_key(&(0, 2)));
        assert!((h.aux_edges[&(0, 4)] - 2.0 / 5.2).abs() < 1e-12);
        assert!((h.aux_edges[&(2, 4)] - 2.0 / 5.2).abs() < 1e-12);
        assert_eq!(h.extra_edges.len(), 7);
        for p in aux.pairs().into_iter().filter(|&p| p != (0, 2)) {
            assert!(h.aux_edges.contains_key(&p));
        }
    }
}
