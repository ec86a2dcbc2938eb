//! Stage 4: conductance fit on each planar candidate, rounding of small
//! conductances to `{0, gamma_min}`, and selection of the final network.

use log::{debug, info};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints;
use crate::dccp::{CcpOptions, CcpReport, DcProblem, Domain};
use crate::error::{Error, Result};
use crate::fit::{solve_fit, FitProblem, Targets};
use crate::interiors::Hat;
use crate::measurements::MeasurementSet;
use crate::model::LinearModel;
use crate::netcore::{Network, Pair};
use crate::planarity::Graph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub n_b: usize,
    pub n_i: usize,
    pub edges: Vec<Pair>,
    pub conductances: Vec<f64>,
    pub objective: f64,
    pub feasible: bool,
    pub report: CcpReport,
}

impl CandidateResult {
    /// Network of the nonzero edges.
    pub fn network(&self) -> Result<Network<f64>> {
        Network::new(
            self.n_b,
            self.n_i,
            self.edges.iter().zip(&self.conductances).filter(|(_, &c)| c > 0.0).map(|(&(u, v), &c)| (u, v, c)),
        )
    }

    pub fn active_edges(&self) -> Vec<Pair> {
        self.edges.iter().zip(&self.conductances).filter(|(_, &c)| c > 0.0).map(|(&p, _)| p).collect()
    }

    /// Interior nodes with no incident nonzero edge.
    pub fn unplaced(&self) -> Vec<usize> {
        let active = self.active_edges();
        (self.n_b..self.n_b + self.n_i).filter(|&v| !active.iter().any(|&(a, b)| a == v || b == v)).collect()
    }
}

pub fn pi3_problem(
    n_nodes: usize,
    edges: &[Pair],
    ms: &MeasurementSet,
    estimate: &DMatrix<f64>,
    lower: f64,
    upper: f64,
) -> Result<FitProblem> {
    let model = LinearModel::per_edge(n_nodes, ms.n_b(), edges)?;
    Ok(FitProblem::new(
        model,
        Targets::from_measurements(ms, estimate),
        Some(ms.kirchhoff_index()),
        constraints::generate_all(ms),
        Domain::uniform(edges.len(), lower, upper),
    ))
}

fn result(
    problem: &mut FitProblem,
    n_nodes: usize,
    ms: &MeasurementSet,
    edges: Vec<Pair>,
    c0: &[f64],
    opts: &CcpOptions,
) -> Result<CandidateResult> {
    let out = solve_fit(problem, c0, opts)?;
    Ok(CandidateResult {
        n_b: ms.n_b(),
        n_i: n_nodes - ms.n_b(),
        edges,
        conductances: out.v,
        objective: out.objective,
        feasible: out.report.feasible && out.objective.is_finite(),
        report: out.report,
    })
}

/// Fits the conductances of `cand` inside `[0, gamma_max]` from `c0`.
pub fn solve_pi3(
    cand: &Graph,
    ms: &MeasurementSet,
    estimate: &DMatrix<f64>,
    c0: &[f64],
    opts: &CcpOptions,
) -> Result<CandidateResult> {
    let mut p = pi3_problem(cand.n, &cand.edges, ms, estimate, 0.0, ms.gamma_max())?;
    result(&mut p, cand.n, ms, cand.edges.clone(), c0, opts)
}

/// Sends each conductance in `(0, gamma_min)` to `0` when raising it to
/// `gamma_min` would increase the objective, to `gamma_min` otherwise (in
/// index order, others held at their current values).
pub fn round_gap(problem: &FitProblem, c: &[f64], gamma_min: f64) -> Vec<f64> {
    let mut q = c.to_vec();
    for i in 0..q.len() {
        if !(q[i] > 0.0 && q[i] < gamma_min) {
            continue;
        }
        let mut hi = q.clone();
        hi[i] = gamma_min;
        let mut lo = q.clone();
        lo[i] = 0.0;
        q[i] = if problem.objective(&hi) - problem.objective(&lo) > 0.0 { 0.0 } else { gamma_min };
    }
    q
}

/// Rounds the gap and, when anything changed, re-solves once on the
/// surviving edges inside `[gamma_min, gamma_max]`.
pub fn round_conductances(
    res: &CandidateResult,
    ms: &MeasurementSet,
    estimate: &DMatrix<f64>,
    opts: &CcpOptions,
) -> Result<CandidateResult> {
    let (gmin, gmax) = (ms.gamma_min(), ms.gamma_max());
    let n = res.n_b + res.n_i;
    let full = pi3_problem(n, &res.edges, ms, estimate, 0.0, gmax)?;
    let rounded = round_gap(&full, &res.conductances, gmin);
    if rounded == res.conductances && rounded.iter().all(|&c| c == 0.0 || c >= gmin) {
        return Ok(res.clone());
    }
    let keep: Vec<usize> = (0..rounded.len()).filter(|&k| rounded[k] > 0.0).collect();
    let edges: Vec<Pair> = keep.iter().map(|&k| res.edges[k]).collect();
    let c0: Vec<f64> = keep.iter().map(|&k| rounded[k]).collect();
    let mut p = pi3_problem(n, &edges, ms, estimate, gmin, gmax)?;
    let out = result(&mut p, n, ms, edges, &c0, opts)?;
    debug!("rewire: rounded {} -> {} edges, objective {:.3e}", res.edges.len(), out.edges.len(), out.objective);
    Ok(out)
}

/// Index of the feasible result with the smallest objective; ties go to
/// fewer edges, then to the lexicographically smaller edge set.
pub fn select_best(results: &[CandidateResult]) -> Result<usize> {
    results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.feasible)
        .min_by(|(_, a), (_, b)| {
            a.objective
                .total_cmp(&b.objective)
                .then(a.active_edges().len().cmp(&b.active_edges().len()))
                .then(a.active_edges().cmp(&b.active_edges()))
        })
        .map(|(k, _)| k)
        .ok_or(Error::AllInfeasible)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage4Output {
    pub results: Vec<CandidateResult>,
    pub best: usize,
    pub unplaced: Vec<usize>,
}

impl Stage4Output {
    pub fn network(&self) -> Result<Network<f64>> {
        self.results[self.best].network()
    }
}

/// Solves and rounds every candidate (in parallel), then selects.
pub fn run(
    candidates: &[Graph],
    hat: &Hat,
    ms: &MeasurementSet,
    estimate: &DMatrix<f64>,
    opts: &CcpOptions,
) -> Result<Stage4Output> {
    let results: Vec<CandidateResult> = candidates
        .par_iter()
        .map(|g| {
            let c0 = hat.initial_conductances(&g.edges, ms.gamma_max());
            let r = solve_pi3(g, ms, estimate, &c0, opts)?;
            round_conductances(&r, ms, estimate, opts)
        })
        .collect::<Result<_>>()?;
    let best = select_best(&results)?;
    let unplaced = results[best].unplaced();
    info!("rewire: candidate {best} of {} selected, objective {:.6e}", results.len(), results[best].objective);
    Ok(Stage4Output { results, best, unplaced })
}

/// Evaluates the fit objective of an arbitrary network against the targets.
pub fn objective_of(net: &Network<f64>, ms: &MeasurementSet, estimate: &DMatrix<f64>) -> Result<f64> {
    let edges = net.pairs();
    let p = pi3_problem(net.node_count(), &edges, ms, estimate, 0.0, f64::INFINITY)?;
    Ok(p.evaluate(&net.conductances(), false).map_or(f64::INFINITY, |e| e.objective()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(objective: f64, edges: Vec<Pair>, feasible: bool) -> CandidateResult {
        let c = vec![1.0; edges.len()];
        CandidateResult { n_b: 3, n_i: 0, edges, conductances: c, objective, feasible, report: CcpReport::default() }
    }

    #[test]
    fn select_rules() {
        assert_eq!(select_best(&[res(0.3, vec![(0, 1)], true)]), Ok(0));
        assert_eq!(select_best(&[res(0.3, vec![(0, 1)], true), res(0.1, vec![(0, 1)], true)]), Ok(1));
        assert_eq!(select_best(&[res(0.1, vec![(0, 1), (1, 2)], true), res(0.1, vec![(0, 2)], true)]), Ok(1));
        assert_eq!(select_best(&[res(0.1, vec![(0, 2)], true), res(0.1, vec![(0, 1)], true)]), Ok(1));
        assert_eq!(select_best(&[res(0.0, vec![(0, 1)], false)]), Err(Error::AllInfeasible));
    }

    fn two_node() -> (MeasurementSet, DMatrix<f64>) {
        let ms = MeasurementSet::new(2, 0, [0, 1], [(0, 1, 0.8)], 0.8, 0.25, 2.0).unwrap();
        let est = DMatrix::from_row_slice(2, 2, &[0.0, 0.8, 0.8, 0.0]);
        (ms, est)
    }

    #[test]
    fn two_node_exact() {
        let (ms, est) = two_node();
        let g = Graph::new(2, [(0, 1)]);
        let r = solve_pi3(&g, &ms, &est, &[2.0], &CcpOptions::default()).unwrap();
        assert!((r.conductances[0] - 1.25).abs() < 1e-5, "{:?}", r.conductances);
    }

    #[test]
    fn gap_rounding_rules() {
        let (ms, est) = two_node();
        let topo = [(0, 1), (0, 1)];
        let model = LinearModel::new(
            2,
            2,
            topo.iter()
                .enumerate()
                .map(|(k, &(u, v))| crate::model::ModelEdge { u, v, base: 0.0, var: Some((k, 1.0)) })
                .collect(),
            2,
        )
        .unwrap();
        let p = FitProblem::new(
            model,
            Targets::from_measurements(&ms, &est),
            None,
            Vec::new(),
            Domain::uniform(2, 0.0, 2.0),
        );
        assert_eq!(round_gap(&p, &[1.25, 0.0], 0.25), vec![1.25, 0.0]);
        // Total already exact: adding more conductance hurts.
        assert_eq!(round_gap(&p, &[1.25, 0.1], 0.25), vec![1.25, 0.0]);
        // Total too small: raising helps.
        assert_eq!(round_gap(&p, &[1.0, 0.2], 0.25), vec![1.0, 0.25]);
    }
}
