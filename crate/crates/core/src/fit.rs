//! Weighted distance-fitting objective shared by the switch, auxiliary and
//! candidate optimizations:
//!
//! `sum_p W_p (t_p - r_p(v))^2 [+ (K(v) - K_target)^2]`
//!
//! subject to triangle and Kalmanson inequalities on the model distances.
//! Writing the objective as `F - G` with `F = sum W r^2 + K^2 + const` and
//! `G = sum 2 W t r + 2 K_target K` makes both parts convex in the
//! conductances.

use nalgebra::DMatrix;

use crate::constraints::{self, Constraint};
use crate::dccp::{self, CcpOptions, CcpReport, DcEval, DcProblem, Domain, Part};
use crate::error::Result;
use crate::measurements::MeasurementSet;
use crate::model::LinearModel;
use crate::netcore::{all_pairs, Pair};

/// Bounds on the weights of pairs that involve an unavailable node.
pub const WEIGHT_BOUNDS: (f64, f64) = (0.5, 0.9);
pub const WEIGHT_INIT: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
pub struct Targets {
    pub pairs: Vec<Pair>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    /// Weight is a decision variable (pair touches an unavailable node).
    pub free: Vec<bool>,
}

impl Targets {
    /// Measured distances for available pairs, `estimate` entries for the
    /// rest.
    pub fn from_measurements(ms: &MeasurementSet, estimate: &DMatrix<f64>) -> Self {
        let pairs = all_pairs(ms.n_b());
        let mut values = Vec::new();
        let mut weights = Vec::new();
        let mut free = Vec::new();
        for &(i, j) in &pairs {
            match ms.distance(i, j) {
                Some(d) => {
                    values.push(d);
                    weights.push(1.0);
                    free.push(false);
                }
                None => {
                    values.push(estimate[(i, j)]);
                    weights.push(WEIGHT_INIT);
                    free.push(true);
                }
            }
        }
        Self { pairs, values, weights, free }
    }

    /// Minimizes the objective over the free weights for fixed residuals:
    /// the lower bound wherever the residual is nonzero.
    pub fn weight_step(&mut self, r: &[f64]) -> bool {
        let mut changed = false;
        for ((w, &free), (&y, &x)) in self.weights.iter_mut().zip(&self.free).zip(self.values.iter().zip(r)) {
            if free && y != x && *w != WEIGHT_BOUNDS.0 {
                *w = WEIGHT_BOUNDS.0;
                changed = true;
            }
        }
        changed
    }
}

#[derive(Debug, Clone)]
pub struct FitProblem {
    pub model: LinearModel,
    pub targets: Targets,
    pub kirchhoff: Option<f64>,
    pub constraints: Vec<Constraint>,
    domain: Domain,
    terms: Vec<(Vec<usize>, Vec<usize>)>,
}

impl FitProblem {
    pub fn new(
        model: LinearModel,
        targets: Targets,
        kirchhoff: Option<f64>,
        constraints: Vec<Constraint>,
        domain: Domain,
    ) -> Self {
        let index = |p: Pair| targets.pairs.iter().position(|&q| q == p).expect("constraint pair is a boundary pair");
        let terms = constraints
            .iter()
            .map(|c| {
                let t = c.terms();
                (
                    t.iter().filter(|x| x.1 > 0.0).map(|x| index(x.0)).collect(),
                    t.iter().filter(|x| x.1 < 0.0).map(|x| index(x.0)).collect(),
                )
            })
            .collect();
        Self { model, targets, kirchhoff, constraints, domain, terms }
    }

    /// Objective at `v`; `+inf` where the boundary is disconnected.
    pub fn objective(&self, v: &[f64]) -> f64 {
        self.evaluate(v, false).map_or(f64::INFINITY, |e| e.objective())
    }

    /// Model distances over the target pairs.
    pub fn distances(&self, v: &[f64]) -> Option<Vec<f64>> {
        self.model.evaluate(v, &self.targets.pairs, false).map(|e| e.r)
    }

    /// Smallest constraint residual at `v` (`+inf` when there are none,
    /// `-inf` when the boundary is disconnected).
    pub fn min_residual(&self, v: &[f64]) -> f64 {
        match self.distances(v) {
            None => f64::NEG_INFINITY,
            Some(r) => self
                .terms
                .iter()
                .map(|(pos, neg)| pos.iter().map(|&k| r[k]).sum::<f64>() - neg.iter().map(|&k| r[k]).sum::<f64>())
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn residual_matrix(&self, v: &[f64]) -> Option<DMatrix<f64>> {
        let r = self.distances(v)?;
        let n = self.model.n_b();
        let mut m = DMatrix::zeros(n, n);
        for (&(i, j), x) in self.targets.pairs.iter().zip(r) {
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
        Some(m)
    }

    pub fn check_constraints(&self, v: &[f64], tol: f64) -> bool {
        self.residual_matrix(v)
            .and_then(|r| constraints::min_residual(&r, &self.constraints).ok())
            .is_some_and(|m| m >= -tol)
    }
}

impl DcProblem for FitProblem {
    fn dim(&self) -> usize {
        self.model.n_vars()
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn evaluate(&self, v: &[f64], gradients: bool) -> Option<DcEval> {
        let ev = self.model.evaluate(v, &self.targets.pairs, gradients)?;
        let n = self.dim();
        let t = &self.targets;
        let mut f = Part { value: 0.0, grad: if gradients { vec![0.0; n] } else { Vec::new() } };
        let mut g = f.clone();
        for (p, &r) in ev.r.iter().enumerate() {
            let (w, y) = (t.weights[p], t.values[p]);
            f.value += w * (r * r + y * y);
            g.value += 2.0 * w * y * r;
            if gradients {
                for k in 0..n {
                    let d = ev.dr[p][k];
                    if d != 0.0 {
                        f.grad[k] += 2.0 * w * r * d;
                        g.grad[k] += 2.0 * w * y * d;
                    }
                }
            }
        }
        if let Some(kt) = self.kirchhoff {
            f.value += ev.k * ev.k + kt * kt;
            g.value += 2.0 * kt * ev.k;
            if gradients {
                for k in 0..n {
                    f.grad[k] += 2.0 * ev.k * ev.dk[k];
                    g.grad[k] += 2.0 * kt * ev.dk[k];
                }
            }
        }
        let part = |idx: &[usize]| Part {
            value: idx.iter().map(|&k| ev.r[k]).sum(),
            grad: if gradients { (0..n).map(|x| idx.iter().map(|&k| ev.dr[k][x]).sum()).collect() } else { Vec::new() },
        };
        let constraints = self.terms.iter().map(|(pos, neg)| (part(pos), part(neg))).collect();
        Some(DcEval { f, g, constraints })
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub v: Vec<f64>,
    pub objective: f64,
    pub weights: Vec<f64>,
    pub report: CcpReport,
}

/// Alternates a weight step with a CCP solve until the weights settle
/// (at most three rounds).
pub fn solve_fit(problem: &mut FitProblem, v0: &[f64], opts: &CcpOptions) -> Result<FitOutcome> {
    if let Some(r) = problem.distances(v0) {
        problem.targets.weight_step(&r);
    }
    let mut v = v0.to_vec();
    let mut report = None;
    for _ in 0..3 {
        let (nv, rep) = dccp::solve(problem, &v, opts)?;
        v = nv;
        report = Some(rep);
        match problem.distances(&v) {
            Some(r) if problem.targets.weight_step(&r) => continue,
            _ => break,
        }
    }
    let objective = problem.objective(&v);
    Ok(FitOutcome { v, objective, weights: problem.targets.weights.clone(), report: report.unwrap() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_matches_definition() {
        let model = LinearModel::per_edge(3, 3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let targets = Targets {
            pairs: vec![(0, 1), (0, 2), (1, 2)],
            values: vec![1.0, 0.5, 0.8],
            weights: vec![1.0, 0.5, 0.7],
            free: vec![false, true, true],
        };
        let p = FitProblem::new(model.clone(), targets.clone(), Some(3.0), vec![], Domain::uniform(3, 0.0, 10.0));
        let v = [1.0, 2.0, 1.5];
        let ev = model.evaluate(&v, &targets.pairs, false).unwrap();
        let want: f64 = (0..3).map(|k| targets.weights[k] * (targets.values[k] - ev.r[k]).powi(2)).sum::<f64>()
            + (ev.k - 3.0).powi(2);
        assert!((p.objective(&v) - want).abs() < 1e-12);
        assert!(dccp::gradcheck(&p, 5, 3).passed);
    }

    #[test]
    fn weight_step_goes_to_lower_bound() {
        let mut t = Targets {
            pairs: vec![(0, 1), (0, 2)],
            values: vec![1.0, 1.0],
            weights: vec![1.0, 0.7],
            free: vec![false, true],
        };
        assert!(t.weight_step(&[0.9, 0.8]));
        assert_eq!(t.weights, vec![1.0, 0.5]);
        assert!(!t.weight_step(&[0.9, 0.8]));
    }

    #[test]
    fn recovers_triangle_conductances() {
        let model = LinearModel::per_edge(3, 3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let truth = [1.0, 0.5, 2.0];
        let ev = model.evaluate(&truth, &[(0, 1), (0, 2), (1, 2)], false).unwrap();
        let targets = Targets {
            pairs: vec![(0, 1), (0, 2), (1, 2)],
            values: ev.r.clone(),
            weights: vec![1.0; 3],
            free: vec![false; 3],
        };
        let mut p = FitProblem::new(model, targets, Some(ev.k), vec![], Domain::uniform(3, 0.0, 4.0));
        let opts = CcpOptions { max_outer: 100, max_inner: 500, ..Default::default() };
        let out = solve_fit(&mut p, &[1.0, 1.0, 1.0], &opts).unwrap();
        for (a, b) in out.v.iter().zip(truth) {
            assert!((a - b).abs() < 1e-3, "{:?} {:?}", out.v, out.report);
        }
    }
}
