//! Graph and electrical primitives: Laplacian, incidence vectors, the
//! Laplacian pseudoinverse, resistance distance and the Kirchhoff index.
//!
//! Nodes are indexed from 0 internally. Boundary nodes occupy `0..n_b` in
//! clockwise circular order and interior nodes `n_b..n_b + n_i`. Edges are
//! stored as `(min, max)` pairs sorted lexicographically; every conductance
//! or switch vector in the crate follows that ordering.
//!
//! All routines are generic over the scalar type so they can run in `f32`
//! or `f64`.

use nalgebra::{DMatrix, DVector, RealField};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node pair `(min, max)`.
pub type Pair = (usize, usize);

/// Orders `(u, v)` as `(min, max)`.
#[inline]
pub fn pair(u: usize, v: usize) -> Pair {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// All unordered pairs `i < j` over `0..n`, lexicographically.
pub fn all_pairs(n: usize) -> Vec<Pair> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge<T> {
    pub u: usize,
    pub v: usize,
    pub conductance: T,
}

impl<T: Copy> Edge<T> {
    pub fn pair(&self) -> Pair {
        (self.u, self.v)
    }
}

/// A resistor network: boundary and interior node counts plus a simple,
/// positively weighted edge set.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T = f64> {
    n_b: usize,
    n_i: usize,
    edges: Vec<Edge<T>>,
}

impl<T: RealField + Copy> Network<T> {
    /// Builds a network, normalizing every edge to `(min, max)` and sorting.
    pub fn new(n_b: usize, n_i: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let m = n_b + n_i;
        let mut out: Vec<Edge<T>> = Vec::new();
        for (a, b, g) in edges {
            if a == b {
                return Err(Error::InvalidNetwork(format!("self-loop on node {a}")));
            }
            let (u, v) = pair(a, b);
            if v >= m {
                return Err(Error::IndexOutOfRange { index: v, size: m });
            }
            if g.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::InvalidNetwork(format!("edge ({u}, {v}) has non-positive conductance")));
            }
            out.push(Edge { u, v, conductance: g });
        }
        out.sort_by_key(|e| e.pair());
        for w in out.windows(2) {
            if w[0].pair() == w[1].pair() {
                return Err(Error::InvalidNetwork(format!("duplicate edge {:?}", w[0].pair())));
            }
        }
        Ok(Self { n_b, n_i, edges: out })
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

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        node < self.n_b
    }

    /// Position of edge `(u, v)` in the global ordering.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = pair(u, v);
        self.edges.binary_search_by_key(&key, |e| e.pair()).ok()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_index(u, v).is_some()
    }

    pub fn conductances(&self) -> Vec<T> {
        self.edges.iter().map(|e| e.conductance).collect()
    }

    pub fn pairs(&self) -> Vec<Pair> {
        self.edges.iter().map(|e| e.pair()).collect()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|e| e.u == node || e.v == node).count()
    }

    /// Same topology with new conductances (in edge order).
    pub fn with_conductances(&self, c: &[T]) -> Result<Self> {
        if c.len() != self.edges.len() {
            return Err(Error::DimensionMismatch { expected: self.edges.len(), actual: c.len() });
        }
        Self::new(self.n_b, self.n_i, self.edges.iter().zip(c).map(|(e, &g)| (e.u, e.v, g)))
    }

    pub fn is_connected(&self) -> bool {
        let labels = components(self.node_count(), self.edges.iter().map(|e| e.pair()));
        labels.iter().all(|&l| l == labels[0])
    }
}

/// Connected-component label per node (labels are the smallest node index
/// in each component).
pub fn components(n: usize, edges: impl IntoIterator<Item = Pair>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, b) in edges {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
        }
    }
    (0..n).map(|x| find(&mut parent, x)).collect()
}

#[inline]
fn cast<T: RealField + Copy>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Weighted Laplacian of `n` nodes from `(u, v, conductance)` triples.
pub fn laplacian_from_edges<T: RealField + Copy>(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize, T)>,
) -> DMatrix<T> {
    let mut l = DMatrix::<T>::zeros(n, n);
    for (u, v, g) in edges {
        l[(u, v)] -= g;
        l[(v, u)] -= g;
        l[(u, u)] += g;
        l[(v, v)] += g;
    }
    l
}

pub fn laplacian<T: RealField + Copy>(net: &Network<T>) -> DMatrix<T> {
    laplacian_from_edges(net.node_count(), net.edges.iter().map(|e| (e.u, e.v, e.conductance)))
}

/// `L + J/n`.
pub fn regularized<T: RealField + Copy>(l: &DMatrix<T>) -> DMatrix<T> {
    let n = l.nrows();
    let shift = T::one() / cast::<T>(n as f64);
    l.map(|x| x + shift)
}

fn connectivity_tol<T: RealField + Copy>(n: usize) -> T {
    let eps: T = T::default_epsilon() * cast::<T>(100.0 * n.max(1) as f64);
    let floor: T = cast(1e-10);
    if eps > floor {
        eps
    } else {
        floor
    }
}

/// `(L + J/n)^{-1}` after checking that its smallest eigenvalue clears the
/// connectivity tolerance.
pub fn regularized_inverse<T: RealField + Copy>(l: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = l.nrows();
    if n == 0 {
        return Err(Error::InvalidNetwork("empty network".into()));
    }
    let m = regularized(l);
    let eig = m.clone().symmetric_eigenvalues();
    let min = eig.iter().copied().fold(eig[0], |a, b| if b < a { b } else { a });
    if min <= connectivity_tol::<T>(n) {
        return Err(Error::SingularNetwork(nalgebra::try_convert(min).unwrap_or(f64::NAN)));
    }
    m.cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::SingularNetwork(nalgebra::try_convert(min).unwrap_or(f64::NAN)))
}

/// Moore-Penrose pseudoinverse of a connected-graph Laplacian,
/// `(L + J/n)^{-1} - J/n`.
pub fn laplacian_pinv<T: RealField + Copy>(l: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = l.nrows();
    let inv = regularized_inverse(l)?;
    let shift = T::one() / cast::<T>(n as f64);
    Ok(inv.map(|x| x - shift))
}

/// Resistance matrix from a pseudoinverse: `R = J diag(X) + diag(X) J - 2X`.
pub fn resistance_matrix_from_pinv<T: RealField + Copy>(pinv: &DMatrix<T>) -> DMatrix<T> {
    let n = pinv.nrows();
    let two: T = cast(2.0);
    DMatrix::from_fn(n, n, |i, j| if i == j { T::zero() } else { pinv[(i, i)] + pinv[(j, j)] - two * pinv[(i, j)] })
}

/// Effective resistance between `i` and `j`.
pub fn resistance_distance<T: RealField + Copy>(net: &Network<T>, i: usize, j: usize) -> Result<T> {
    let m = net.node_count();
    for k in [i, j] {
        if k >= m {
            return Err(Error::IndexOutOfRange { index: k, size: m });
        }
    }
    if i == j {
        return Err(Error::InvalidNetwork(format!("resistance distance needs distinct nodes, got {i} twice")));
    }
    let pinv = laplacian_pinv(&laplacian(net))?;
    Ok(pinv[(i, i)] + pinv[(j, j)] - cast::<T>(2.0) * pinv[(i, j)])
}

pub fn resistance_matrix<T: RealField + Copy>(net: &Network<T>) -> Result<DMatrix<T>> {
    let pinv = laplacian_pinv(&laplacian(net))?;
    Ok(resistance_matrix_from_pinv(&pinv))
}

/// Kirchhoff index as the sum of resistance distances over unordered pairs.
pub fn kirchhoff_index<T: RealField + Copy>(net: &Network<T>) -> Result<T> {
    let r = resistance_matrix(net)?;
    let half: T = cast(0.5);
    Ok(r.sum() * half)
}

/// Kirchhoff index through the trace identity `n Tr (L + J/n)^{-1} - n`.
pub fn kirchhoff_index_trace<T: RealField + Copy>(net: &Network<T>) -> Result<T> {
    let n: T = cast(net.node_count() as f64);
    let inv = regularized_inverse(&laplacian(net))?;
    Ok(n * inv.trace() - n)
}

/// Column `edge_index` of the oriented incidence matrix: `+1` at the smaller
/// endpoint and `-1` at the larger.
pub fn incidence_column<T: RealField + Copy>(net: &Network<T>, edge_index: usize) -> Result<DVector<T>> {
    let e = net.edges.get(edge_index).ok_or(Error::IndexOutOfRange { index: edge_index, size: net.edges.len() })?;
    let mut b = DVector::zeros(net.node_count());
    b[e.u] = T::one();
    b[e.v] = -T::one();
    Ok(b)
}

/// `(L + J/n)^{-1}` together with the contractions used by resistance
/// distances and their derivatives. `b_ij` denotes `e_i - e_j`.
#[derive(Debug, Clone)]
pub struct GroundedInverse<T> {
    inv: DMatrix<T>,
}

impl<T: RealField + Copy> GroundedInverse<T> {
    /// Eigenvalue-checked construction.
    pub fn new(l: &DMatrix<T>) -> Result<Self> {
        Ok(Self { inv: regularized_inverse(l)? })
    }

    /// Cholesky-only construction for callers that already verified
    /// connectivity combinatorially.
    pub fn from_connected(l: &DMatrix<T>) -> Result<Self> {
        let m = regularized(l);
        m.cholesky().map(|c| Self { inv: c.inverse() }).ok_or(Error::SingularNetwork(0.0))
    }

    pub fn of(net: &Network<T>) -> Result<Self> {
        Self::new(&laplacian(net))
    }

    pub fn size(&self) -> usize {
        self.inv.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.inv
    }

    /// `b_ij^T X b_ab`.
    #[inline]
    pub fn transfer(&self, (i, j): Pair, (a, b): Pair) -> T {
        let x = &self.inv;
        (x[(i, a)] - x[(i, b)]) - (x[(j, a)] - x[(j, b)])
    }

    #[inline]
    pub fn resistance(&self, i: usize, j: usize) -> T {
        self.transfer((i, j), (i, j))
    }

    pub fn kirchhoff(&self) -> T {
        let n: T = cast(self.size() as f64);
        n * self.inv.trace() - n
    }

    /// `|X b_ab|^2`.
    pub fn column_norm_sq(&self, (a, b): Pair) -> T {
        let x = &self.inv;
        let mut s = T::zero();
        for k in 0..x.nrows() {
            let d = x[(k, a)] - x[(k, b)];
            s += d * d;
        }
        s
    }
}

/// A resistance distance that may be infinite (open circuit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance<T> {
    Finite(T),
    Infinite,
}

impl<T: Copy> Distance<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Distance::Finite(x) => Some(x),
            Distance::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Distance::Infinite)
    }
}

impl Distance<f64> {
    /// `f64::INFINITY` for open circuits.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// Resistance distances for `pairs`, computed per connected component so
/// that pairs in different components come back as [`Distance::Infinite`]
/// instead of an error.
pub fn component_distances<T: RealField + Copy>(net: &Network<T>, pairs: &[Pair]) -> Result<Vec<Distance<T>>> {
    let n = net.node_count();
    let labels = components(n, net.edges.iter().map(|e| e.pair()));
    let mut cache: Vec<Option<(Vec<usize>, GroundedInverse<T>)>> = vec![None; n];
    let mut out = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs {
        for k in [i, j] {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, size: n });
            }
        }
        if labels[i] != labels[j] {
            out.push(Distance::Infinite);
            continue;
        }
        let root = labels[i];
        if cache[root].is_none() {
            let mut local = vec![usize::MAX; n];
            let mut count = 0;
            for (v, &l) in labels.iter().enumerate() {
                if l == root {
                    local[v] = count;
                    count += 1;
                }
            }
            let lap = laplacian_from_edges(
                count,
                net.edges.iter().filter(|e| labels[e.u] == root).map(|e| (local[e.u], local[e.v], e.conductance)),
            );
            cache[root] = Some((local, GroundedInverse::new(&lap)?));
        }
        let (local, inv) = cache[root].as_ref().unwrap();
        out.push(if i == j {
            Distance::Finite(T::zero())
        } else {
            Distance::Finite(inv.resistance(local[i], local[j]))
        });
    }
    Ok(out)
}
