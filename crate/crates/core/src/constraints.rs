//! Triangle and Kalmanson inequalities over boundary resistance distances.
//!
//! Only tuples containing at least one unavailable boundary node are
//! generated: among available nodes the distances are data, not variables.

use nalgebra::{DMatrix, RealField};

use crate::error::{Error, Result};
use crate::measurements::MeasurementSet;
use crate::netcore::Pair;

/// `r(i,j) + r(j,k) - r(i,k) >= 0` with `i < j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KalmansonForm {
    /// `(r(i,k) + r(j,l)) - (r(i,j) + r(k,l))`
    First,
    /// `(r(i,k) + r(j,l)) - (r(j,k) + r(i,l))`
    Second,
}

/// Four-point circular-order inequality with `i < j < k < l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Kalmanson {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub form: KalmansonForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    Triangle(Triangle),
    Kalmanson(Kalmanson),
}

impl Constraint {
    /// The residual as a signed sum of pair distances. Positive terms come
    /// first.
    pub fn terms(&self) -> Vec<(Pair, f64)> {
        match *self {
            Constraint::Triangle(Triangle { i, j, k }) => vec![((i, j), 1.0), ((j, k), 1.0), ((i, k), -1.0)],
            Constraint::Kalmanson(Kalmanson { i, j, k, l, form }) => {
                let neg = match form {
                    KalmansonForm::First => [(i, j), (k, l)],
                    KalmansonForm::Second => [(j, k), (i, l)],
                };
                vec![((i, k), 1.0), ((j, l), 1.0), (neg[0], -1.0), (neg[1], -1.0)]
            }
        }
    }

    fn max_index(&self) -> usize {
        match *self {
            Constraint::Triangle(t) => t.k,
            Constraint::Kalmanson(q) => q.l,
        }
    }

    pub fn residual<T: RealField + Copy>(&self, r: &DMatrix<T>) -> Result<T> {
        let n = r.nrows().min(r.ncols());
        if self.max_index() >= n {
            let (a, b) = self.terms().into_iter().map(|t| t.0).find(|p| p.1 >= n).unwrap_or((0, 0));
            return Err(Error::MissingEntry(a, b));
        }
        let mut s = T::zero();
        for ((a, b), c) in self.terms() {
            if c > 0.0 {
                s += r[(a, b)];
            } else {
                s -= r[(a, b)];
            }
        }
        Ok(s)
    }
}

fn admissible(ms: &MeasurementSet, idx: &[usize]) -> bool {
    idx.iter().any(|&x| !ms.is_available(x))
}

pub fn generate_triangle(ms: &MeasurementSet) -> Vec<Triangle> {
    let n = ms.n_b();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if admissible(ms, &[i, j, k]) {
                    out.push(Triangle { i, j, k });
                }
            }
        }
    }
    out
}

pub fn generate_kalmanson(ms: &MeasurementSet) -> Vec<Kalmanson> {
    let n = ms.n_b();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    if admissible(ms, &[i, j, k, l]) {
                        for form in [KalmansonForm::First, KalmansonForm::Second] {
                            out.push(Kalmanson { i, j, k, l, form });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Triangles followed by Kalmanson inequalities.
pub fn generate_all(ms: &MeasurementSet) -> Vec<Constraint> {
    generate_triangle(ms)
        .into_iter()
        .map(Constraint::Triangle)
        .chain(generate_kalmanson(ms).into_iter().map(Constraint::Kalmanson))
        .collect()
}

pub fn evaluate<T: RealField + Copy>(r: &DMatrix<T>, cs: &[Constraint]) -> Result<Vec<T>> {
    cs.iter().map(|c| c.residual(r)).collect()
}

/// Smallest residual, or `+inf` for an empty constraint list.
pub fn min_residual(r: &DMatrix<f64>, cs: &[Constraint]) -> Result<f64> {
    Ok(evaluate(r, cs)?.into_iter().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{resistance_matrix, Network};

    fn ms(n_b: usize, available: &[usize]) -> MeasurementSet {
        let mut d = Vec::new();
        for (x, &a) in available.iter().enumerate() {
            for &b in &available[x + 1..] {
                d.push((a, b, 1.0));
            }
        }
        MeasurementSet::new(n_b, 0, available.iter().copied(), d, 10.0, 0.25, 2.0).unwrap()
    }

    #[test]
    fn triangles_with_one_hidden() {
        let t = generate_triangle(&ms(4, &[0, 2, 3]));
        let got: Vec<_> = t.iter().map(|t| (t.i, t.j, t.k)).collect();
        assert_eq!(got, vec![(0, 1, 2), (0, 1, 3), (1, 2, 3)]);
        assert!(generate_triangle(&ms(4, &[0, 1, 2, 3])).is_empty());
        assert_eq!(generate_triangle(&ms(3, &[0, 2])).len(), 1);
    }

    #[test]
    fn kalmanson_counts() {
        let k = generate_kalmanson(&ms(4, &[0, 2, 3]));
        assert_eq!(k.len(), 2);
        assert!(k.iter().all(|q| (q.i, q.j, q.k, q.l) == (0, 1, 2, 3)));
        assert!(generate_kalmanson(&ms(3, &[0, 2])).is_empty());
        assert_eq!(generate_kalmanson(&ms(5, &[0, 2, 3])).len(), 10);
    }

    #[test]
    fn residual_values() {
        let k3 = Network::new(3, 0, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let r = resistance_matrix(&k3).unwrap();
        let c = Constraint::Triangle(Triangle { i: 0, j: 1, k: 2 });
        assert!((c.residual::<f64>(&r).unwrap() - 2.0 / 3.0).abs() < 1e-12);

        let path = Network::new(3, 0, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let r = resistance_matrix(&path).unwrap();
        assert!(c.residual::<f64>(&r).unwrap().abs() < 1e-12);
    }

    #[test]
    fn missing_entry() {
        let r = DMatrix::<f64>::zeros(3, 3);
        let c = Constraint::Triangle(Triangle { i: 0, j: 1, k: 3 });
        assert!(matches!(c.residual(&r), Err(Error::MissingEntry(_, 3))));
    }
}
