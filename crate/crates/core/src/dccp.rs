//! Convex-concave procedure for difference-of-convex programs, and the
//! analytic derivatives of resistance distance and Kirchhoff index with
//! respect to edge conductances.
//!
//! A problem minimizes `f(v) - g(v)` subject to `p_j(v) - q_j(v) >= 0`,
//! where `f`, `g`, `p_j`, `q_j` are convex, over a box intersected with
//! capped simplices `sum_{k in group} v_k <= 1`. Each outer iteration
//! linearizes `g` and every `p_j` at the current point and runs projected
//! gradient on the convex surrogate with a quadratic penalty on the
//! linearized constraints.

use std::ops::Range;

use log::debug;
use nalgebra::RealField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::{GroundedInverse, Network, Pair};

/// Box bounds plus disjoint groups whose sum is capped at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub groups: Vec<Range<usize>>,
}

impl Domain {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self { lower, upper, groups: Vec::new() }
    }

    pub fn uniform(n: usize, lo: f64, hi: f64) -> Self {
        Self::boxed(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        v.iter().zip(&self.lower).zip(&self.upper).all(|((x, lo), hi)| *x >= lo - tol && *x <= hi + tol)
            && self.groups.iter().all(|g| v[g.clone()].iter().sum::<f64>() <= 1.0 + tol)
    }

    /// Euclidean projection.
    pub fn project(&self, v: &mut [f64]) {
        for ((x, lo), hi) in v.iter_mut().zip(&self.lower).zip(&self.upper) {
            *x = x.clamp(*lo, *hi);
        }
        for g in &self.groups {
            if v[g.clone()].iter().sum::<f64>() <= 1.0 {
                continue;
            }
            let clip = |x: f64, k: usize| (x).clamp(self.lower[k], self.upper[k]);
            let orig: Vec<f64> = v[g.clone()].to_vec();
            let sum_at = |theta: f64| orig.iter().enumerate().map(|(o, x)| clip(x - theta, g.start + o)).sum::<f64>();
            let (mut lo, mut hi) = (0.0, orig.iter().copied().fold(0.0, f64::max));
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if sum_at(mid) > 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            for (o, x) in orig.iter().enumerate() {
                v[g.start + o] = clip(x - hi, g.start + o);
            }
        }
    }
}

/// Value and (optionally) gradient of one convex function.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Part {
    pub value: f64,
    pub grad: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DcEval {
    /// Convex part of the objective.
    pub f: Part,
    /// Subtracted convex part of the objective.
    pub g: Part,
    /// `(p_j, q_j)` with constraint `p_j - q_j >= 0`.
    pub constraints: Vec<(Part, Part)>,
}

impl DcEval {
    pub fn objective(&self) -> f64 {
        self.f.value - self.g.value
    }

    /// Largest constraint violation, 0 when feasible.
    pub fn violation(&self) -> f64 {
        self.constraints.iter().map(|(p, q)| (q.value - p.value).max(0.0)).fold(0.0, f64::max)
    }
}

pub trait DcProblem: Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> &Domain;
    /// `None` signals a point where the oracles are undefined (for example a
    /// disconnected network).
    fn evaluate(&self, v: &[f64], gradients: bool) -> Option<DcEval>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcpOptions {
    pub max_outer: usize,
    pub max_inner: usize,
    pub tau_init: f64,
    pub tau_growth: f64,
    pub tau_cap: f64,
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub eps_feas: f64,
    /// Iterations of projected-gradient refinement on the penalized true
    /// objective after the outer loop (0 disables it).
    pub polish_iter: usize,
    pub seed: u64,
}

impl Default for CcpOptions {
    fn default() -> Self {
        Self {
            max_outer: 30,
            max_inner: 100,
            tau_init: 1.0,
            tau_growth: 5.0,
            tau_cap: 1e4,
            inner_tol: 1e-9,
            outer_tol: 1e-8,
            eps_feas: 1e-6,
            polish_iter: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterStep {
    #[serde(with = "crate::io::float")]
    pub objective: f64,
    #[serde(with = "crate::io::float")]
    pub violation: f64,
    /// Penalized surrogate at the linearization point and after the inner solve.
    #[serde(with = "crate::io::float")]
    pub surrogate_before: f64,
    #[serde(with = "crate::io::float")]
    pub surrogate_after: f64,
    #[serde(with = "crate::io::float")]
    pub tau: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CcpReport {
    #[serde(with = "crate::io::float")]
    pub objective: f64,
    #[serde(with = "crate::io::float")]
    pub violation: f64,
    pub feasible: bool,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    pub trace: Vec<OuterStep>,
}

struct Linearization<'a> {
    v: &'a [f64],
    g0: f64,
    gg: &'a [f64],
    cons: Vec<(f64, &'a [f64])>,
    tau: f64,
}

impl Linearization<'_> {
    fn lin(&self, base: f64, grad: &[f64], x: &[f64]) -> f64 {
        base + grad.iter().zip(x).zip(self.v).map(|((g, a), b)| g * (a - b)).sum::<f64>()
    }

    /// Penalized surrogate, its largest linearized violation, and gradient.
    fn surrogate(&self, e: &DcEval, x: &[f64], grad: bool) -> (f64, f64, Vec<f64>) {
        let mut val = e.f.value - self.lin(self.g0, self.gg, x);
        let mut worst: f64 = 0.0;
        let mut gr = Vec::new();
        if grad {
            gr = e.f.grad.iter().zip(self.gg).map(|(a, b)| a - b).collect();
        }
        for ((_, q), &(p0, gp)) in e.constraints.iter().zip(&self.cons) {
            let c = q.value - self.lin(p0, gp, x);
            if c > 0.0 {
                worst = worst.max(c);
                val += self.tau * c * c;
                if grad {
                    for ((x, a), b) in gr.iter_mut().zip(&q.grad).zip(gp) {
                        *x += 2.0 * self.tau * c * (a - b);
                    }
                }
            }
        }
        (val, worst, gr)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Runs the convex-concave procedure from `v0` (projected onto the domain).
/// Returns the best feasible iterate, or the last one flagged infeasible.
pub fn solve(p: &dyn DcProblem, v0: &[f64], opts: &CcpOptions) -> Result<(Vec<f64>, CcpReport)> {
    let dom = p.domain();
    if v0.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), actual: v0.len() });
    }
    let mut v = v0.to_vec();
    dom.project(&mut v);
    let mut e = p.evaluate(&v, true).ok_or(Error::OracleFailure)?;
    if !e.objective().is_finite() {
        return Err(Error::OracleFailure);
    }
    let mut evals = 1;
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    let consider = |v: &[f64], e: &DcEval, best: &mut Option<(Vec<f64>, f64, f64)>| {
        let (obj, viol) = (e.objective(), e.violation());
        if viol <= opts.eps_feas && best.as_ref().is_none_or(|b| obj < b.1) {
            *best = Some((v.to_vec(), obj, viol));
        }
    };
    consider(&v, &e, &mut best);
    let mut tau = opts.tau_init;
    let mut alpha_ok: f64 = 1.0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut prev = v.clone();
    let mut theta: f64 = 1.0;
    for outer in 0..opts.max_outer {
        iterations = outer + 1;
        let obj0 = e.objective();
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = (theta - 1.0) / theta_next;
        theta = theta_next;
        if beta > 0.0 {
            let mut z: Vec<f64> = v.iter().zip(&prev).map(|(a, b)| a + beta * (a - b)).collect();
            dom.project(&mut z);
            evals += 1;
            match p.evaluate(&z, true) {
                Some(ez) if ez.objective() <= obj0 && ez.violation() <= e.violation().max(opts.eps_feas) => {
                    prev = v.clone();
                    v = z;
                    e = ez;
                }
                _ => {
                    theta = 1.0;
                    prev = v.clone();
                }
            }
        } else {
            prev = v.clone();
        }
        let lz = Linearization { v: &v.clone(), g0: e.g.value, gg: &e.g.grad.clone(), cons: Vec::new(), tau };
        let cons_store: Vec<(f64, Vec<f64>)> =
            e.constraints.iter().map(|(pp, _)| (pp.value, pp.grad.clone())).collect();
        let lz = Linearization { cons: cons_store.iter().map(|(a, g)| (*a, g.as_slice())).collect(), ..lz };

        let sur = |ez: &DcEval, z: &[f64], g: bool| lz.surrogate(ez, z, g);
        let before = sur(&e, &v, false).0;
        let (x, ex, sx, lam) = spg(p, &v, &e, &sur, opts.max_inner, alpha_ok, opts, &mut evals);
        alpha_ok = lam;
        debug_assert!(sx <= before + 1e-12 * (1.0 + before.abs()));
        let step = norm(&x.iter().zip(&v).map(|(a, b)| a - b).collect::<Vec<_>>());
        v = x;
        e = ex;
        consider(&v, &e, &mut best);
        let obj = e.objective();
        trace.push(OuterStep {
            objective: obj,
            violation: e.violation(),
            surrogate_before: before,
            surrogate_after: sx,
            tau,
        });
        debug!("ccp outer {outer}: objective {obj:.6e} violation {:.2e} tau {tau}", e.violation());
        if e.violation() <= opts.eps_feas
            && ((obj0 - obj).abs() <= opts.outer_tol * obj.abs() + 1e-15 || step <= opts.inner_tol * (1.0 + norm(&v)))
        {
            converged = true;
            break;
        }
        tau = (tau * opts.tau_growth).min(opts.tau_cap);
    }
    if opts.polish_iter > 0 {
        let tau = opts.tau_cap;
        let exact = |ez: &DcEval, _: &[f64], g: bool| penalized(ez, tau, g);
        let start = best.as_ref().map_or_else(|| v.clone(), |b| b.0.clone());
        if let Some(es) = p.evaluate(&start, true) {
            evals += 1;
            let (x, ex, _, _) = spg(p, &start, &es, &exact, opts.polish_iter, alpha_ok, opts, &mut evals);
            consider(&x, &ex, &mut best);
            if best.is_none() {
                v = x;
                e = ex;
            }
        }
        if best.is_none() {
            // Feasibility restoration, then one more polish from there.
            let margin = opts.eps_feas / 2.0;
            let restore = |ez: &DcEval, _: &[f64], g: bool| hinge(ez, margin, g);
            let (x, ex, _, _) = spg(p, &v, &e, &restore, opts.polish_iter, alpha_ok, opts, &mut evals);
            consider(&x, &ex, &mut best);
            if best.is_some() {
                let (y, ey, _, _) = spg(p, &x, &ex, &exact, opts.polish_iter, alpha_ok, opts, &mut evals);
                consider(&y, &ey, &mut best);
            } else {
                v = x;
                e = ex;
            }
        }
    }
    let (v, obj, viol, feasible) = match best {
        Some((bv, bo, bw)) => (bv, bo, bw, true),
        None => {
            let viol = e.violation();
            (v, e.objective(), viol, false)
        }
    };
    Ok((v, CcpReport { objective: obj, violation: viol, feasible, converged, iterations, evaluations: evals, trace }))
}

/// Penalized true objective, largest violation, and gradient.
fn penalized(e: &DcEval, tau: f64, grad: bool) -> (f64, f64, Vec<f64>) {
    let mut val = e.objective();
    let mut worst: f64 = 0.0;
    let mut gr: Vec<f64> = if grad { e.f.grad.iter().zip(&e.g.grad).map(|(a, b)| a - b).collect() } else { Vec::new() };
    for (pp, q) in &e.constraints {
        let c = q.value - pp.value;
        if c > 0.0 {
            worst = worst.max(c);
            val += tau * c * c;
            if grad {
                for ((x, a), b) in gr.iter_mut().zip(&q.grad).zip(&pp.grad) {
                    *x += 2.0 * tau * c * (a - b);
                }
            }
        }
    }
    (val, worst, gr)
}

/// Squared hinge of the constraints tightened by `margin`, largest
/// violation, and gradient.
fn hinge(e: &DcEval, margin: f64, grad: bool) -> (f64, f64, Vec<f64>) {
    let mut val = 0.0;
    let mut worst: f64 = 0.0;
    let mut gr = if grad { vec![0.0; e.f.grad.len()] } else { Vec::new() };
    for (pp, q) in &e.constraints {
        let c = q.value - pp.value;
        worst = worst.max(c);
        if c + margin > 0.0 {
            val += (c + margin) * (c + margin);
            if grad {
                for ((x, a), b) in gr.iter_mut().zip(&q.grad).zip(&pp.grad) {
                    *x += 2.0 * (c + margin) * (a - b);
                }
            }
        }
    }
    (val, worst, gr)
}

type Merit<'a> = dyn Fn(&DcEval, &[f64], bool) -> (f64, f64, Vec<f64>) + 'a;

/// Nonmonotone spectral projected gradient on `merit` from `x0`. Steps may
/// not raise the violation above `max(current, eps_feas / 10)`. Returns
/// the best point, its evaluation and merit, and the step length there.
#[allow(clippy::too_many_arguments)]
fn spg(
    p: &dyn DcProblem,
    x0: &[f64],
    e0: &DcEval,
    merit: &Merit,
    max_iter: usize,
    lambda0: f64,
    opts: &CcpOptions,
    evals: &mut usize,
) -> (Vec<f64>, DcEval, f64, f64) {
    let dom = p.domain();
    let mut x = x0.to_vec();
    let mut ex = e0.clone();
    let (mut sx, mut wx, mut gx) = merit(&ex, &x, true);
    let mut best = (x.clone(), ex.clone(), sx, lambda0);
    let mut recent = std::collections::VecDeque::from([sx]);
    let mut lambda = lambda0;
    for _ in 0..max_iter {
        let mut y: Vec<f64> = x.iter().zip(&gx).map(|(a, g)| a - lambda * g).collect();
        dom.project(&mut y);
        let d: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        if norm(&d) <= opts.inner_tol * (1.0 + norm(&x)) {
            break;
        }
        let slope: f64 = gx.iter().zip(&d).map(|(a, b)| a * b).sum();
        let reference = recent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let z: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            *evals += 1;
            if let Some(ez) = p.evaluate(&z, true) {
                let (sz, wz, gz) = merit(&ez, &z, true);
                if sz.is_finite() && sz <= reference + 1e-4 * t * slope && wz <= wx.max(opts.eps_feas / 10.0) {
                    accepted = Some((z, ez, sz, wz, gz));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((z, ez, sz, wz, gz)) = accepted else { break };
        let sk: Vec<f64> = z.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yk: Vec<f64> = gz.iter().zip(&gx).map(|(a, b)| a - b).collect();
        let ss: f64 = sk.iter().map(|a| a * a).sum();
        let sy: f64 = sk.iter().zip(&yk).map(|(a, b)| a * b).sum();
        lambda = if sy > 0.0 { (ss / sy).clamp(1e-12, 1e12) } else { 1e3 * lambda.min(1e9) };
        let gain = sx - sz;
        x = z;
        ex = ez;
        sx = sz;
        wx = wz;
        gx = gz;
        if sx < best.2 {
            best = (x.clone(), ex.clone(), sx, lambda);
        }
        recent.push_back(sx);
        if recent.len() > 10 {
            recent.pop_front();
        }
        if gain.abs() <= 1e-16 * (1.0 + sx.abs()) && norm(&sk) <= opts.inner_tol * (1.0 + norm(&x)) {
            break;
        }
    }
    best
}

fn edge_pair<T: RealField + Copy>(net: &Network<T>, l: usize) -> Result<Pair> {
    net.edges().get(l).map(|e| e.pair()).ok_or(Error::IndexOutOfRange { index: l, size: net.edge_count() })
}

/// `d r(i,j) / d c_l = -(b_ij^T (L + J/n)^{-1} b_l)^2`.
pub fn grad_rd<T: RealField + Copy>(net: &Network<T>, ij: Pair, l: usize) -> Result<T> {
    let inv = GroundedInverse::of(net)?;
    let t = inv.transfer(ij, edge_pair(net, l)?);
    Ok(-(t * t))
}

/// `d K / d c_l = -n |(L + J/n)^{-1} b_l|^2`.
pub fn grad_kirchhoff<T: RealField + Copy>(net: &Network<T>, l: usize) -> Result<T> {
    let inv = GroundedInverse::of(net)?;
    let n: T = nalgebra::convert(net.node_count() as f64);
    Ok(-n * inv.column_norm_sq(edge_pair(net, l)?))
}

/// `d^2 r(i,j) / d c_l^2 = 2 (b_ij^T X b_l)^2 (b_l^T X b_l)`, `X = (L + J/n)^{-1}`.
pub fn hess_diag_rd<T: RealField + Copy>(net: &Network<T>, ij: Pair, l: usize) -> Result<T> {
    let inv = GroundedInverse::of(net)?;
    let e = edge_pair(net, l)?;
    let t = inv.transfer(ij, e);
    let two: T = nalgebra::convert(2.0);
    Ok(two * t * t * inv.resistance(e.0, e.1))
}

/// `d^2 K / d c_l^2 = 2n (b_l^T X b_l)(b_l^T X^2 b_l)`.
pub fn hess_diag_kirchhoff<T: RealField + Copy>(net: &Network<T>, l: usize) -> Result<T> {
    let inv = GroundedInverse::of(net)?;
    let e = edge_pair(net, l)?;
    let two_n: T = nalgebra::convert(2.0 * net.node_count() as f64);
    Ok(two_n * inv.resistance(e.0, e.1) * inv.column_norm_sq(e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckRow {
    pub oracle: String,
    pub max_rel_err: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub rows: Vec<GradcheckRow>,
    pub passed: bool,
}

impl GradcheckReport {
    fn from_rows(rows: Vec<(String, f64)>, tol: f64) -> Self {
        let rows: Vec<GradcheckRow> =
            rows.into_iter().map(|(oracle, e)| GradcheckRow { oracle, max_rel_err: e, passed: e <= tol }).collect();
        let passed = rows.iter().all(|r| r.passed);
        Self { rows, passed }
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let mut s = format!("{:<28} {:>12}  {}\n", "oracle", "max rel err", "status");
        for r in &self.rows {
            s.push_str(&format!(
                "{:<28} {:>12.3e}  {}\n",
                r.oracle,
                r.max_rel_err,
                if r.passed { "pass" } else { "FAIL" }
            ));
        }
        s
    }
}

/// Relative error with a small absolute floor on the scale.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Compares every oracle gradient of `p` against central differences at
/// `samples` random interior points of its domain.
pub fn gradcheck(p: &dyn DcProblem, samples: usize, seed: u64) -> GradcheckReport {
    let dom = p.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Vec<(String, f64)> = Vec::new();
    let mut bump = |name: String, e: f64| match worst.iter_mut().find(|w| w.0 == name) {
        Some(w) => w.1 = w.1.max(e),
        None => worst.push((name, e)),
    };
    for _ in 0..samples {
        let mut v: Vec<f64> = (0..p.dim())
            .map(|k| {
                let lo = dom.lower[k];
                let span = if dom.upper[k].is_finite() { dom.upper[k] - lo } else { 1.0 + lo.abs() };
                lo + (0.1 + 0.8 * rng.gen::<f64>()) * span
            })
            .collect();
        for g in &dom.groups {
            let s: f64 = v[g.clone()].iter().sum();
            if s > 0.9 {
                for x in &mut v[g.clone()] {
                    *x *= 0.9 / s;
                }
            }
        }
        let Some(e) = p.evaluate(&v, true) else { continue };
        for k in 0..p.dim() {
            let h = 1e-6 * (1.0 + v[k].abs());
            let mut a = v.clone();
            let mut b = v.clone();
            a[k] += h;
            b[k] -= h;
            let (Some(ea), Some(eb)) = (p.evaluate(&a, false), p.evaluate(&b, false)) else { continue };
            let fd = |x: f64, y: f64| (x - y) / (2.0 * h);
            bump("objective f".into(), rel_err(e.f.grad[k], fd(ea.f.value, eb.f.value)));
            bump("objective g".into(), rel_err(e.g.grad[k], fd(ea.g.value, eb.g.value)));
            for (j, (pp, qq)) in e.constraints.iter().enumerate() {
                let (pa, qa) = &ea.constraints[j];
                let (pb, qb) = &eb.constraints[j];
                bump(format!("constraint {j} p"), rel_err(pp.grad[k], fd(pa.value, pb.value)));
                bump(format!("constraint {j} q"), rel_err(qq.grad[k], fd(qa.value, qb.value)));
            }
        }
    }
    GradcheckReport::from_rows(worst, 1e-5)
}

/// Largest error of `(analytic, numeric)` pairs relative to
/// `max(|analytic|, |numeric|, 1e-3 * max_l |analytic_l|)`, so that exact
/// zeros (edges on no path between the pair) are judged against the size of
/// the gradient they belong to.
fn worst_scaled(rows: &[(f64, f64)]) -> f64 {
    let scale = 1e-3 * rows.iter().fold(0.0f64, |m, r| m.max(r.0.abs())).max(1e-300);
    rows.iter().map(|&(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(scale)).fold(0.0, f64::max)
}

/// Checks the closed-form derivatives of every pair distance and of the
/// Kirchhoff index against finite differences on one network. First
/// derivatives use tolerance `1e-5`, diagonal Hessians `1e-3`.
pub fn check_network_derivatives(net: &Network<f64>) -> Result<GradcheckReport> {
    use crate::netcore::{kirchhoff_index, resistance_matrix};
    let n = net.node_count();
    let m = net.edge_count();
    let c = net.conductances();
    let pairs = crate::netcore::all_pairs(n);
    let at = |l: usize, d: f64| -> Result<Network<f64>> {
        let mut cc = c.clone();
        cc[l] += d;
        net.with_conductances(&cc)
    };
    let r0 = resistance_matrix(net)?;
    let k0 = kirchhoff_index(net)?;
    // rows[q][l] = (analytic, numeric); q indexes pairs, then K.
    let mut g = vec![Vec::with_capacity(m); pairs.len() + 1];
    let mut h = vec![Vec::with_capacity(m); pairs.len() + 1];
    let mut sign = f64::NEG_INFINITY;
    for (l, &cl) in c.iter().enumerate() {
        let dh = 1e-5 * cl;
        let ds = 1e-3 * cl;
        let (np, nm) = (at(l, dh)?, at(l, -dh)?);
        let (sp, sm) = (at(l, ds)?, at(l, -ds)?);
        let (rp, rm) = (resistance_matrix(&np)?, resistance_matrix(&nm)?);
        let (rsp, rsm) = (resistance_matrix(&sp)?, resistance_matrix(&sm)?);
        for (q, &(i, j)) in pairs.iter().enumerate() {
            let an = grad_rd(net, (i, j), l)?;
            sign = sign.max(an);
            g[q].push((an, (rp[(i, j)] - rm[(i, j)]) / (2.0 * dh)));
            h[q].push((hess_diag_rd(net, (i, j), l)?, (rsp[(i, j)] - 2.0 * r0[(i, j)] + rsm[(i, j)]) / (ds * ds)));
        }
        let an = grad_kirchhoff(net, l)?;
        sign = sign.max(an);
        let q = pairs.len();
        g[q].push((an, (kirchhoff_index(&np)? - kirchhoff_index(&nm)?) / (2.0 * dh)));
        h[q].push((
            hess_diag_kirchhoff(net, l)?,
            (kirchhoff_index(&sp)? - 2.0 * k0 + kirchhoff_index(&sm)?) / (ds * ds),
        ));
    }
    let q = pairs.len();
    let worst = |rows: &[Vec<(f64, f64)>]| rows.iter().map(|r| worst_scaled(r)).fold(0.0, f64::max);
    let mut rep = GradcheckReport::from_rows(
        vec![("d r / d c".into(), worst(&g[..q])), ("d K / d c".into(), worst_scaled(&g[q]))],
        1e-5,
    );
    let second = GradcheckReport::from_rows(
        vec![("d2 r / d c2".into(), worst(&h[..q])), ("d2 K / d c2".into(), worst_scaled(&h[q]))],
        1e-3,
    );
    rep.rows.extend(second.rows);
    rep.rows.push(GradcheckRow { oracle: "max first derivative".into(), max_rel_err: sign, passed: sign <= 0.0 });
    rep.passed = rep.rows.iter().all(|r| r.passed);
    Ok(rep)
}

/// Runs [`check_network_derivatives`] on `samples` random connected
/// networks with `n` nodes (random spanning tree plus extra edges,
/// conductances in `[0.5, 2]`) and keeps the worst value per row.
pub fn gradcheck_random(n: usize, samples: usize, seed: u64) -> Result<GradcheckReport> {
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<GradcheckRow> = Vec::new();
    for _ in 0..samples {
        let mut edges = std::collections::BTreeSet::new();
        for v in 1..n {
            edges.insert(crate::netcore::pair(rng.gen_range(0..v), v));
        }
        for (u, v) in crate::netcore::all_pairs(n) {
            if rng.gen::<f64>() < 0.3 {
                edges.insert((u, v));
            }
        }
        let net =
            Network::new(n, 0, edges.into_iter().map(|(u, v)| (u, v, rng.gen_range(0.5..2.0))).collect::<Vec<_>>())?;
        for r in check_network_derivatives(&net)?.rows {
            match rows.iter_mut().find(|w| w.oracle == r.oracle) {
                Some(w) => {
                    w.max_rel_err = w.max_rel_err.max(r.max_rel_err);
                    w.passed &= r.passed;
                }
                None => rows.push(r),
            }
        }
    }
    let passed = rows.iter().all(|r| r.passed);
    Ok(GradcheckReport { rows, passed })
}
