#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdnet_core::netcore::{components, pair, Pair};
use rdnet_core::Network;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

type Pt = (f64, f64);

fn orient(a: Pt, b: Pt, c: Pt) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn crosses(p: &[Pt], (a, b): Pair, (c, d): Pair) -> bool {
    if a == c || a == d || b == c || b == d {
        return false;
    }
    let (o1, o2) = (orient(p[a], p[b], p[c]), orient(p[a], p[b], p[d]));
    let (o3, o4) = (orient(p[c], p[d], p[a]), orient(p[c], p[d], p[b]));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Random circular planar network: boundary nodes evenly on the unit
/// circle in label order, interior nodes inside radius 0.6, a greedy
/// non-crossing straight-line edge set, then random deletions that keep
/// the graph connected.
pub fn random_cppr(rng: &mut ChaCha8Rng, n_b: usize, n_i: usize, keep: f64, g: (f64, f64)) -> Network<f64> {
    let mut pts: Vec<Pt> = (0..n_b)
        .map(|k| {
            let t = -2.0 * std::f64::consts::PI * k as f64 / n_b as f64;
            (t.cos(), t.sin())
        })
        .collect();
    for _ in 0..n_i {
        let r = 0.6 * rng.gen::<f64>().sqrt();
        let t = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
        pts.push((r * t.cos(), r * t.sin()));
    }
    let n = n_b + n_i;
    let mut cand: Vec<Pair> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    cand.shuffle(rng);
    let mut edges: Vec<Pair> = Vec::new();
    for e in cand {
        if edges.iter().all(|&f| !crosses(&pts, e, f)) {
            edges.push(e);
        }
    }
    edges.shuffle(rng);
    let mut k = 0;
    while k < edges.len() {
        if rng.gen::<f64>() > keep {
            let trial: Vec<Pair> = edges.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, &e)| e).collect();
            if components(n, trial.iter().copied()).iter().all(|&c| c == 0) {
                edges = trial;
                continue;
            }
        }
        k += 1;
    }
    Network::new(n_b, n_i, edges.into_iter().map(|(u, v)| (u, v, rng.gen_range(g.0..=g.1)))).unwrap()
}

/// Random connected graph on `n` nodes (spanning tree plus extras).
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize, g: (f64, f64)) -> Network<f64> {
    let mut set = BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        set.insert(pair(u, v));
    }
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            set.insert(pair(u, v));
        }
    }
    Network::new(n, 0, set.into_iter().map(|(u, v)| (u, v, rng.gen_range(g.0..=g.1)))).unwrap()
}

/// Two-terminal series-parallel expression.
#[derive(Debug, Clone)]
pub enum Sp {
    R(f64),
    Series(Box<Sp>, Box<Sp>),
    Parallel(Box<Sp>, Box<Sp>),
}

impl Sp {
    pub fn resistance(&self) -> f64 {
        match self {
            Sp::R(r) => *r,
            Sp::Series(a, b) => a.resistance() + b.resistance(),
            Sp::Parallel(a, b) => {
                let (x, y) = (a.resistance(), b.resistance());
                x * y / (x + y)
            }
        }
    }

    pub fn random(rng: &mut ChaCha8Rng, depth: usize) -> Sp {
        if depth == 0 || rng.gen::<f64>() < 0.25 {
            return Sp::R(rng.gen_range(0.2..5.0));
        }
        let a = Box::new(Sp::random(rng, depth - 1));
        let b = Box::new(Sp::random(rng, depth - 1));
        if rng.gen() {
            Sp::Series(a, b)
        } else {
            Sp::Parallel(a, b)
        }
    }

    /// Realizes the expression between terminals 0 and 1; returns the edge
    /// list (possibly with parallel edges merged) and the node count.
    pub fn realize(&self) -> (Vec<(usize, usize, f64)>, usize) {
        let mut edges = Vec::new();
        let mut next = 2;
        self.build(0, 1, &mut next, &mut edges);
        let mut merged: std::collections::BTreeMap<Pair, f64> = Default::default();
        for (u, v, r) in edges {
            *merged.entry(pair(u, v)).or_insert(0.0) += 1.0 / r;
        }
        (merged.into_iter().map(|((u, v), g)| (u, v, g)).collect(), next)
    }

    fn build(&self, s: usize, t: usize, next: &mut usize, out: &mut Vec<(usize, usize, f64)>) {
        match self {
            Sp::R(r) => out.push((s, t, *r)),
            Sp::Series(a, b) => {
                let m = *next;
                *next += 1;
                a.build(s, m, next, out);
                b.build(m, t, next, out);
            }
            Sp::Parallel(a, b) => {
                a.build(s, t, next, out);
                b.build(s, t, next, out);
            }
        }
    }
}

/// Brute-force planarity: a graph is non-planar iff it has a subgraph that
/// is a subdivision of K5 or K3,3. Checked by trying every branch-vertex
/// assignment and searching vertex-disjoint paths. Only for tiny graphs.
pub fn kuratowski_planar(n: usize, edges: &[Pair]) -> bool {
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    let nodes: Vec<usize> = (0..n).collect();
    for set in subsets(&nodes, 5) {
        if subdivision(&adj, &set, &k5_pairs()) {
            return false;
        }
    }
    for set in subsets(&nodes, 6) {
        for left in subsets(&set, 3) {
            if !left.contains(&set[0]) {
                continue;
            }
            let right: Vec<usize> = set.iter().copied().filter(|x| !left.contains(x)).collect();
            let mut branch = left.clone();
            branch.extend(right);
            let pairs: Vec<Pair> = (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect();
            if subdivision(&adj, &branch, &pairs) {
                return false;
            }
        }
    }
    true
}

fn k5_pairs() -> Vec<Pair> {
    (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect()
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for mut s in subsets(&items[1..], k - 1) {
        s.insert(0, items[0]);
        out.push(s);
    }
    out.extend(subsets(&items[1..], k));
    out
}

/// Whether branch vertices `b` can be joined pairwise per `pairs` by
/// internally vertex-disjoint paths avoiding other branch vertices.
fn subdivision(adj: &[Vec<bool>], b: &[usize], pairs: &[Pair]) -> bool {
    let n = adj.len();
    let mut used = vec![false; n];
    for &x in b {
        used[x] = true;
    }
    let mut used_edges = BTreeSet::new();
    route(adj, b, pairs, 0, &mut used, &mut used_edges)
}

fn route(
    adj: &[Vec<bool>],
    b: &[usize],
    pairs: &[Pair],
    k: usize,
    used: &mut Vec<bool>,
    ue: &mut BTreeSet<Pair>,
) -> bool {
    if k == pairs.len() {
        return true;
    }
    let (s, t) = (b[pairs[k].0], b[pairs[k].1]);
    let mut path = vec![s];
    paths(adj, b, pairs, k, t, used, ue, &mut path)
}

#[allow(clippy::too_many_arguments)]
fn paths(
    adj: &[Vec<bool>],
    b: &[usize],
    pairs: &[Pair],
    k: usize,
    t: usize,
    used: &mut Vec<bool>,
    ue: &mut BTreeSet<Pair>,
    path: &mut Vec<usize>,
) -> bool {
    let cur = *path.last().unwrap();
    for nx in 0..adj.len() {
        if !adj[cur][nx] || ue.contains(&pair(cur, nx)) {
            continue;
        }
        if nx == t {
            ue.insert(pair(cur, nx));
            if route(adj, b, pairs, k + 1, used, ue) {
                return true;
            }
            ue.remove(&pair(cur, nx));
        } else if !used[nx] {
            used[nx] = true;
            ue.insert(pair(cur, nx));
            path.push(nx);
            if paths(adj, b, pairs, k, t, used, ue, path) {
                return true;
            }
            path.pop();
            ue.remove(&pair(cur, nx));
            used[nx] = false;
        }
    }
    false
}

/// All connected graphs on `n` labelled vertices as edge lists.
pub fn all_connected_graphs(n: usize) -> Vec<Vec<Pair>> {
    let all: Vec<Pair> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << all.len()) {
        let e: Vec<Pair> = (0..all.len()).filter(|&k| mask >> k & 1 == 1).map(|k| all[k]).collect();
        if components(n, e.iter().copied()).iter().all(|&c| c == 0) {
            out.push(e);
        }
    }
    out
}
