//! Estimation of the unmeasured boundary resistance distances.
//!
//! The unknown is the symmetric matrix `X = (L + J/m)^{-1}`. Measured
//! distances, the row sums `X 1 = 1` and the Kirchhoff index are all linear
//! in `X`; they are fitted in the least-squares sense subject to `X` being
//! positive definite and the triangle and Kalmanson inequalities on the
//! boundary distances it implies.

use log::debug;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::constraints::{self, Constraint};
use crate::error::{Error, Result};
use crate::measurements::MeasurementSet;
use crate::netcore::resistance_matrix_from_pinv;

/// Smallest admissible eigenvalue of the estimate.
pub const EIG_FLOOR: f64 = 1e-8;

/// `A vech(X) = rhs`, with `vech` listing the upper triangle row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOptions {
    pub max_iter: usize,
    pub step_tol: f64,
    pub feas_tol: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self { max_iter: 5000, step_tol: 1e-9, feas_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceEstimate {
    /// Estimate of `(L + J/m)^{-1}`.
    pub x: DMatrix<f64>,
    /// Full distance matrix implied by `x`.
    pub r: DMatrix<f64>,
    /// `||A vech(x) - rhs||_2`.
    pub residual: f64,
    pub iterations: usize,
    /// Smallest triangle/Kalmanson residual (`+inf` when there are none).
    pub min_constraint: f64,
}

/// Position of `(i, j)`, `i <= j`, in `vech`.
pub fn vech_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * m - i * (i + 1) / 2 + j
}

pub fn vech(x: &DMatrix<f64>) -> DVector<f64> {
    let m = x.nrows();
    let mut v = DVector::zeros(m * (m + 1) / 2);
    for i in 0..m {
        for j in i..m {
            v[vech_index(m, i, j)] = x[(i, j)];
        }
    }
    v
}

/// Inverse of [`vech`].
pub fn unvech(v: &DVector<f64>, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |i, j| v[vech_index(m, i, j)])
}

/// The equations as symmetric coefficient matrices: `<A_k, X> = b_k`.
fn equations(ms: &MeasurementSet) -> Vec<(DMatrix<f64>, f64)> {
    let m = ms.node_count();
    let av = ms.available();
    let mut eqs = Vec::new();
    for (a, &s) in av.iter().enumerate() {
        for &t in &av[a..] {
            let mut c = DMatrix::zeros(m, m);
            let mut b = 0.0;
            if s != t {
                c[(s, s)] = 1.0;
                c[(t, t)] = 1.0;
                c[(s, t)] = -1.0;
                c[(t, s)] = -1.0;
                b = ms.distance(s, t).expect("available pairs are measured");
            }
            eqs.push((c, b));
        }
    }
    for i in 0..m {
        let mut c = DMatrix::zeros(m, m);
        for j in 0..m {
            c[(i, j)] += 0.5;
            c[(j, i)] += 0.5;
        }
        eqs.push((c, 1.0));
    }
    eqs.push((DMatrix::identity(m, m), 1.0 + ms.kirchhoff_index() / m as f64));
    eqs
}

fn to_vech_row(c: &DMatrix<f64>) -> Vec<f64> {
    let m = c.nrows();
    let mut row = vec![0.0; m * (m + 1) / 2];
    for i in 0..m {
        for j in i..m {
            row[vech_index(m, i, j)] = if i == j { c[(i, i)] } else { c[(i, j)] + c[(j, i)] };
        }
    }
    row
}

/// Rows: the `|A|(|A|+1)/2` distance equations (diagonal pairs included,
/// all zero), then `X 1 = 1`, then the trace equation
/// `tr X = 1 + K / m`.
pub fn assemble(ms: &MeasurementSet) -> LinearSystem {
    let m = ms.node_count();
    let eqs = equations(ms);
    let cols = m * (m + 1) / 2;
    let mut a = DMatrix::zeros(eqs.len(), cols);
    let mut rhs = DVector::zeros(eqs.len());
    for (k, (c, b)) in eqs.iter().enumerate() {
        for (col, x) in to_vech_row(c).into_iter().enumerate() {
            a[(k, col)] = x;
        }
        rhs[k] = *b;
    }
    LinearSystem { a, rhs, m }
}

/// Starting distance matrix: measured entries as given; a hidden boundary
/// node borrows the distances of its available circular neighbours; every
/// remaining entry gets the mean measured distance.
pub fn prior_distances(ms: &MeasurementSet) -> DMatrix<f64> {
    let m = ms.node_count();
    let n_b = ms.n_b();
    let mean = if ms.distances().is_empty() {
        1.0
    } else {
        ms.distances().values().sum::<f64>() / ms.distances().len() as f64
    };
    let mut r = DMatrix::from_element(m, m, mean);
    let known = |i: usize, j: usize| if i == j { Some(0.0) } else { ms.distance(i, j) };
    for i in 0..m {
        r[(i, i)] = 0.0;
        for j in 0..m {
            if let Some(d) = known(i, j) {
                r[(i, j)] = d;
            }
        }
    }
    for u in ms.unavailable() {
        let nbrs: Vec<usize> =
            [(u + n_b - 1) % n_b, (u + 1) % n_b].into_iter().filter(|&v| v != u && ms.is_available(v)).collect();
        for a in ms.available().iter().copied() {
            let vals: Vec<f64> = nbrs.iter().filter_map(|&v| known(v, a)).filter(|&d| d > 0.0).collect();
            if !vals.is_empty() {
                let d = vals.iter().sum::<f64>() / vals.len() as f64;
                r[(u, a)] = d;
                r[(a, u)] = d;
            }
        }
    }
    r
}

/// `X = -P R P / 2 + J/m` with `P = I - J/m`; inverse of
/// `R = diag(X) 1' + 1 diag(X)' - 2X` on matrices with `X 1 = 1`.
pub fn x_from_distances(r: &DMatrix<f64>) -> DMatrix<f64> {
    let m = r.nrows();
    let j = DMatrix::from_element(m, m, 1.0 / m as f64);
    let p = DMatrix::identity(m, m) - &j;
    -(&p * r * &p) * 0.5 + j
}

fn project_psd(x: &mut DMatrix<f64>) {
    let eig = SymmetricEigen::new(x.clone());
    if eig.eigenvalues.min() >= EIG_FLOOR {
        return;
    }
    let d = eig.eigenvalues.map(|l| l.max(EIG_FLOOR));
    let q = &eig.eigenvectors;
    *x = q * DMatrix::from_diagonal(&d) * q.transpose();
    x.fill_lower_triangle_with_upper_triangle();
}

fn constraint_matrix(c: &Constraint, m: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m, m);
    for ((a, b), s) in c.terms() {
        out[(a, a)] += s;
        out[(b, b)] += s;
        out[(a, b)] -= s;
        out[(b, a)] -= s;
    }
    out
}

/// Dykstra's alternating projection onto the half-spaces and the
/// eigenvalue floor (last, so the result is always positive definite).
fn project_feasible(y: &DMatrix<f64>, halfspaces: &[(DMatrix<f64>, f64)], cycles: usize) -> DMatrix<f64> {
    let mut x = y.clone();
    if halfspaces.is_empty() {
        project_psd(&mut x);
        return x;
    }
    let mut incr: Vec<DMatrix<f64>> = vec![DMatrix::zeros(y.nrows(), y.ncols()); halfspaces.len() + 1];
    for _ in 0..cycles {
        let start = x.clone();
        for (k, (c, cc)) in halfspaces.iter().enumerate() {
            let z = &x + &incr[k];
            let v = c.dot(&z);
            let p = if v < 0.0 { &z - c * (v / cc) } else { z.clone() };
            incr[k] = z - &p;
            x = p;
        }
        let z = &x + &incr[halfspaces.len()];
        let mut p = z.clone();
        project_psd(&mut p);
        incr[halfspaces.len()] = z - &p;
        x = p;
        if (&x - &start).norm() <= 1e-13 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Least-squares fit of the linear system by projected gradient.
pub fn estimate(ms: &MeasurementSet) -> Result<DistanceEstimate> {
    estimate_with(ms, &EstimatorOptions::default())
}

pub fn estimate_with(ms: &MeasurementSet, opts: &EstimatorOptions) -> Result<DistanceEstimate> {
    let m = ms.node_count();
    let eqs = equations(ms);
    let cons = constraints::generate_all(ms);
    let halfspaces: Vec<(DMatrix<f64>, f64)> = cons
        .iter()
        .map(|c| {
            let cm = constraint_matrix(c, m);
            let nn = cm.norm_squared();
            (cm, nn)
        })
        .collect();
    let gram = DMatrix::from_fn(eqs.len(), eqs.len(), |i, j| eqs[i].0.dot(&eqs[j].0));
    let lip = 2.0 * SymmetricEigen::new(gram).eigenvalues.max().max(1e-12);
    let step = 1.0 / lip;

    let resid = |x: &DMatrix<f64>| -> Vec<f64> { eqs.iter().map(|(c, b)| c.dot(x) - b).collect() };
    let mut x = project_feasible(&x_from_distances(&prior_distances(ms)), &halfspaces, 500);
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let res = resid(&x);
        let mut grad = DMatrix::zeros(m, m);
        for ((c, _), r) in eqs.iter().zip(&res) {
            grad += c * (2.0 * r);
        }
        let y = &x - grad * step;
        let nx = project_feasible(&y, &halfspaces, 200);
        let moved = (&nx - &x).norm();
        x = nx;
        if moved < opts.step_tol {
            break;
        }
    }
    x = project_feasible(&x, &halfspaces, 5000);
    let r = resistance_matrix_from_pinv(&x);
    let rb = r.view((0, 0), (ms.n_b(), ms.n_b())).into_owned();
    let min_constraint = constraints::min_residual(&rb, &cons)?;
    let residual = resid(&x).iter().map(|v| v * v).sum::<f64>().sqrt();
    debug!("estimator: {iterations} iterations, residual {residual:.3e}, min constraint {min_constraint:.3e}");
    if min_constraint < -opts.feas_tol {
        return Err(Error::Infeasible(format!("distance estimate violates an inequality by {:.3e}", -min_constraint)));
    }
    Ok(DistanceEstimate { x, r, residual, iterations, min_constraint })
}
