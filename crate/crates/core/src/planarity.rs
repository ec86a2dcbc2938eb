//! Planarity: palm trees and path decomposition, side checks for paths, an
//! exact left-right planarity test, and extraction of planar subgraphs
//! from a non-planar graph by dropping conflicting paths.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::{components, pair, Pair};

/// Simple undirected graph on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<Pair>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = Pair>) -> Self {
        let set: BTreeSet<Pair> = edges.into_iter().filter(|(u, v)| u != v).map(|(u, v)| pair(u, v)).collect();
        Self { n, edges: set.into_iter().collect() }
    }

    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        Self::new(a + b, (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))))
    }

    pub fn contains(&self, e: Pair) -> bool {
        self.edges.binary_search(&pair(e.0, e.1)).is_ok()
    }

    pub fn without(&self, drop: &BTreeSet<Pair>) -> Self {
        Self { n: self.n, edges: self.edges.iter().copied().filter(|e| !drop.contains(e)).collect() }
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        components(self.n, self.edges.iter().copied()).iter().all(|&c| c == 0)
    }

    /// Undirected DOT text with 1-based labels.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph {name} {{\n");
        for v in 0..self.n {
            s.push_str(&format!("  {};\n", v + 1));
        }
        for &(u, v) in &self.edges {
            s.push_str(&format!("  {} -- {};\n", u + 1, v + 1));
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arc {
    Tree,
    Back,
}

/// DFS palm tree. Internally everything is in DFS numbers (`0` = root);
/// `vertex` maps numbers back to graph labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PalmTree {
    pub vertex: Vec<usize>,
    pub number: Vec<Option<usize>>,
    pub parent: Vec<Option<usize>>,
    /// `(from, to)` in DFS numbers, `from < to`.
    pub tree_arcs: Vec<Pair>,
    /// `(from, to)` in DFS numbers, `from > to`.
    pub back_edges: Vec<Pair>,
    pub l1: Vec<usize>,
    pub l2: Vec<usize>,
    /// Outgoing arcs per DFS number, sorted by `phi`.
    pub adj: Vec<Vec<(usize, Arc, usize)>>,
}

impl PalmTree {
    pub fn size(&self) -> usize {
        self.vertex.len()
    }

    pub fn label(&self, k: usize) -> usize {
        self.vertex[k]
    }
}

/// Palm tree from a DFS rooted at the smallest vertex with ascending
/// adjacency. Ordering weight: a tree arc `v -> w` gets
/// `2 L1(w)` (`+1` when `L2(w) < v`); back edges `v -> w` get
/// `2 (n + w)`, so every tree arc precedes every back edge.
pub fn dfs_palm(g: &Graph) -> Result<PalmTree> {
    if g.n == 0 || !g.is_connected() {
        return Err(Error::DisconnectedInput);
    }
    let adj = g.adjacency();
    let n = g.n;
    let mut number = vec![None; n];
    let mut vertex = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    let mut tree_arcs = Vec::new();
    let mut back_edges = Vec::new();
    let mut seen = HashSet::new();
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    number[0] = Some(0);
    vertex.push(0);
    while let Some(&mut (v, ref mut i)) = stack.last_mut() {
        if *i >= adj[v].len() {
            stack.pop();
            continue;
        }
        let w = adj[v][*i];
        *i += 1;
        if !seen.insert(pair(v, w)) {
            continue;
        }
        let (nv, nw) = (number[v].unwrap(), number[w]);
        match nw {
            None => {
                let k = vertex.len();
                number[w] = Some(k);
                vertex.push(w);
                parent[k] = Some(nv);
                tree_arcs.push((nv, k));
                stack.push((w, 0));
            }
            Some(k) => back_edges.push((nv, k)),
        }
    }
    let parent: Vec<Option<usize>> = parent.into_iter().take(n).collect();
    let mut l1: Vec<usize> = (0..n).collect();
    let mut l2: Vec<usize> = (0..n).collect();
    let mut reach: Vec<BTreeSet<usize>> = (0..n).map(|v| BTreeSet::from([v])).collect();
    for &(v, w) in &back_edges {
        reach[v].insert(w);
    }
    for k in (1..n).rev() {
        let p = parent[k].unwrap();
        let r = std::mem::take(&mut reach[k]);
        let mut it = r.iter();
        l1[k] = *it.next().unwrap();
        l2[k] = it.next().copied().unwrap_or(k).min(k);
        if l1[k] == k {
            l2[k] = k;
        }
        reach[p].extend(r.into_iter().filter(|&x| x < k));
        reach[k] = BTreeSet::new();
    }
    let r0 = std::mem::take(&mut reach[0]);
    l1[0] = *r0.iter().next().unwrap();
    l2[0] = 0;
    let mut out = vec![Vec::new(); n];
    for &(v, w) in &tree_arcs {
        let phi = 2 * l1[w] + usize::from(l2[w] < v);
        out[v].push((w, Arc::Tree, phi));
    }
    for &(v, w) in &back_edges {
        out[v].push((w, Arc::Back, 2 * (n + w)));
    }
    for a in &mut out {
        a.sort_by_key(|&(w, _, phi)| (phi, w));
    }
    Ok(PalmTree { vertex, number, parent, tree_arcs, back_edges, l1, l2, adj: out })
}

/// Tree path ending in one back edge, in graph labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub vertices: Vec<usize>,
    /// DFS numbers of the first vertex and of the back edge head.
    pub start: usize,
    pub end: usize,
}

impl Path {
    pub fn edges(&self) -> Vec<Pair> {
        self.vertices.windows(2).map(|w| pair(w[0], w[1])).collect()
    }

    /// Closing back edge.
    pub fn back_edge(&self) -> Pair {
        let k = self.vertices.len();
        pair(self.vertices[k - 2], self.vertices[k - 1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDecomposition {
    pub cycle: Path,
    pub paths: Vec<Path>,
}

/// Path finding over the ordered adjacency: a path follows tree arcs and
/// ends at the first back edge; the next edge starts a new path.
pub fn find_paths(p: &PalmTree) -> Result<PathDecomposition> {
    let mut all: Vec<Path> = Vec::new();
    let mut current: Option<Vec<usize>> = None;
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    while let Some(&mut (v, ref mut i)) = stack.last_mut() {
        if *i >= p.adj[v].len() {
            stack.pop();
            continue;
        }
        let (w, kind, _) = p.adj[v][*i];
        *i += 1;
        let cur = current.get_or_insert_with(|| vec![v]);
        cur.push(w);
        match kind {
            Arc::Tree => stack.push((w, 0)),
            Arc::Back => {
                let nums = current.take().unwrap();
                all.push(Path {
                    start: nums[0],
                    end: *nums.last().unwrap(),
                    vertices: nums.iter().map(|&k| p.label(k)).collect(),
                });
            }
        }
    }
    if all.is_empty() {
        return Err(Error::InvalidNetwork("graph has no cycle".into()));
    }
    let cycle = all.remove(0);
    Ok(PathDecomposition { cycle, paths: all })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Heads of embedded back edges per side, tagged with the path index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingState {
    pub left: Vec<(usize, usize)>,
    pub right: Vec<(usize, usize)>,
}

impl EmbeddingState {
    fn stack(&self, side: Side) -> &Vec<(usize, usize)> {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    fn stack_mut(&mut self, side: Side) -> &mut Vec<(usize, usize)> {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }

    /// Paths on `side` whose head lies strictly between `j1` and `i1`.
    pub fn conflicts(&self, i1: usize, j1: usize, side: Side) -> Vec<usize> {
        self.stack(side).iter().filter(|&&(k, _)| j1 < k && k < i1).map(|&(_, id)| id).collect()
    }

    pub fn push(&mut self, head: usize, id: usize, side: Side) {
        self.stack_mut(side).push((head, id));
    }
}

/// A path from `i1` to `j1` fits on `side` iff no back edge
/// embedded there enters a `k` with `j1 < k < i1`.
pub fn admissible_side(state: &EmbeddingState, i1: usize, j1: usize, side: Side) -> bool {
    state.conflicts(i1, j1, side).is_empty()
}

// ---- left-right planarity test ----

#[derive(Clone, Copy, Default, PartialEq)]
struct Interval {
    low: Option<usize>,
    high: Option<usize>,
}

impl Interval {
    fn empty(&self) -> bool {
        self.low.is_none() && self.high.is_none()
    }
}

#[derive(Clone, Copy, Default)]
struct ConflictPair {
    left: Interval,
    right: Interval,
}

struct Lr {
    height: Vec<Option<usize>>,
    parent_edge: Vec<Option<usize>>,
    /// Oriented edges `(from, to)`.
    dir: Vec<Pair>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting: Vec<usize>,
    out: Vec<Vec<usize>>,
    stack: Vec<ConflictPair>,
    stack_bottom: Vec<usize>,
    lowpt_edge: Vec<usize>,
    refs: Vec<Option<usize>>,
}

impl Lr {
    fn conflicting(&self, i: &Interval, b: usize) -> bool {
        !i.empty() && self.lowpt[i.high.unwrap()] > self.lowpt[b]
    }

    fn lowest(&self, p: &ConflictPair) -> usize {
        if p.left.empty() {
            return self.lowpt[p.right.low.unwrap()];
        }
        if p.right.empty() {
            return self.lowpt[p.left.low.unwrap()];
        }
        self.lowpt[p.left.low.unwrap()].min(self.lowpt[p.right.low.unwrap()])
    }

    fn orient(&mut self, adj: &[Vec<(usize, usize)>], oriented: &mut [bool], v: usize) {
        let e = self.parent_edge[v];
        for &(w, id) in &adj[v] {
            if oriented[id] {
                continue;
            }
            oriented[id] = true;
            self.dir[id] = (v, w);
            self.out[v].push(id);
            let hv = self.height[v].unwrap();
            self.lowpt[id] = hv;
            self.lowpt2[id] = hv;
            match self.height[w] {
                None => {
                    self.parent_edge[w] = Some(id);
                    self.height[w] = Some(hv + 1);
                    self.orient(adj, oriented, w);
                }
                Some(hw) => self.lowpt[id] = hw,
            }
            self.nesting[id] = 2 * self.lowpt[id] + usize::from(self.lowpt2[id] < hv);
            if let Some(e) = e {
                if self.lowpt[id] < self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt[e].min(self.lowpt2[id]);
                    self.lowpt[e] = self.lowpt[id];
                } else if self.lowpt[id] > self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt[id]);
                } else {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt2[id]);
                }
            }
        }
    }

    fn test(&mut self, v: usize) -> bool {
        let e = self.parent_edge[v];
        let out = self.out[v].clone();
        for (idx, &ei) in out.iter().enumerate() {
            let w = self.dir[ei].1;
            self.stack_bottom[ei] = self.stack.len();
            if self.parent_edge[w] == Some(ei) {
                if !self.test(w) {
                    return false;
                }
            } else {
                self.lowpt_edge[ei] = ei;
                self.stack.push(ConflictPair {
                    left: Interval::default(),
                    right: Interval { low: Some(ei), high: Some(ei) },
                });
            }
            if self.lowpt[ei] < self.height[v].unwrap() {
                if idx == 0 {
                    if let Some(e) = e {
                        self.lowpt_edge[e] = self.lowpt_edge[ei];
                    }
                } else if !self.add_constraints(ei, e.unwrap()) {
                    return false;
                }
            }
        }
        if let Some(e) = e {
            self.remove_back_edges(e);
        }
        true
    }

    fn add_constraints(&mut self, ei: usize, e: usize) -> bool {
        let mut p = ConflictPair::default();
        loop {
            let Some(mut q) = self.stack.pop() else { return false };
            if !q.left.empty() {
                std::mem::swap(&mut q.left, &mut q.right);
            }
            if !q.left.empty() {
                return false;
            }
            if self.lowpt[q.right.low.unwrap()] > self.lowpt[e] {
                if p.right.empty() {
                    p.right = q.right;
                } else if let Some(l) = p.right.low {
                    self.refs[l] = q.right.high;
                }
                p.right.low = q.right.low;
            } else {
                self.refs[q.right.low.unwrap()] = Some(self.lowpt_edge[e]);
            }
            if self.stack.len() <= self.stack_bottom[ei] {
                break;
            }
        }
        while let Some(top) = self.stack.last().copied() {
            if !(self.conflicting(&top.left, ei) || self.conflicting(&top.right, ei)) {
                break;
            }
            let mut q = self.stack.pop().unwrap();
            if self.conflicting(&q.right, ei) {
                std::mem::swap(&mut q.left, &mut q.right);
            }
            if self.conflicting(&q.right, ei) {
                return false;
            }
            if let Some(l) = p.right.low {
                self.refs[l] = q.right.high;
            }
            if q.right.low.is_some() {
                p.right.low = q.right.low;
            }
            if p.left.empty() {
                p.left = q.left;
            } else if let Some(l) = p.left.low {
                self.refs[l] = q.left.high;
            }
            p.left.low = q.left.low;
        }
        if !(p.left.empty() && p.right.empty()) {
            self.stack.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, e: usize) {
        let u = self.dir[e].0;
        let hu = self.height[u].unwrap();
        while let Some(top) = self.stack.last() {
            if self.lowest(top) != hu {
                break;
            }
            self.stack.pop();
        }
        if let Some(mut p) = self.stack.pop() {
            while let Some(h) = p.left.high {
                if self.dir[h].1 != u {
                    break;
                }
                p.left.high = self.refs[h];
            }
            if p.left.high.is_none() {
                if let Some(l) = p.left.low {
                    self.refs[l] = p.right.low;
                    p.left.low = None;
                }
            }
            while let Some(h) = p.right.high {
                if self.dir[h].1 != u {
                    break;
                }
                p.right.high = self.refs[h];
            }
            if p.right.high.is_none() {
                if let Some(l) = p.right.low {
                    self.refs[l] = p.left.low;
                    p.right.low = None;
                }
            }
            self.stack.push(p);
        }
        if self.lowpt[e] < hu {
            if let Some(top) = self.stack.last() {
                let (hl, hr) = (top.left.high, top.right.high);
                self.refs[e] = match (hl, hr) {
                    (Some(l), None) => Some(l),
                    (Some(l), Some(r)) if self.lowpt[l] > self.lowpt[r] => Some(l),
                    _ => hr,
                };
            }
        }
    }
}

/// Exact planarity test (left-right criterion).
pub fn is_planar(g: &Graph) -> bool {
    let n = g.n;
    let m = g.edges.len();
    if n >= 3 && m > 3 * n - 6 {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for (id, &(u, v)) in g.edges.iter().enumerate() {
        adj[u].push((v, id));
        adj[v].push((u, id));
    }
    let mut lr = Lr {
        height: vec![None; n],
        parent_edge: vec![None; n],
        dir: vec![(0, 0); m],
        lowpt: vec![0; m],
        lowpt2: vec![0; m],
        nesting: vec![0; m],
        out: vec![Vec::new(); n],
        stack: Vec::new(),
        stack_bottom: vec![0; m],
        lowpt_edge: vec![0; m],
        refs: vec![None; m],
    };
    let mut oriented = vec![false; m];
    let mut roots = Vec::new();
    for v in 0..n {
        if lr.height[v].is_none() {
            lr.height[v] = Some(0);
            roots.push(v);
            lr.orient(&adj, &mut oriented, v);
        }
    }
    for v in 0..n {
        let mut o = std::mem::take(&mut lr.out[v]);
        o.sort_by_key(|&id| lr.nesting[id]);
        lr.out[v] = o;
    }
    for r in roots {
        lr.stack.clear();
        if !lr.test(r) {
            return false;
        }
    }
    true
}

/// Edge sets of the biconnected components, in discovery order.
pub fn biconnected_components(g: &Graph) -> Vec<Vec<Pair>> {
    let adj = g.adjacency();
    let n = g.n;
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut time = 0;
    let mut out = Vec::new();
    let mut estack: Vec<Pair> = Vec::new();
    for s in 0..n {
        if disc[s] != usize::MAX {
            continue;
        }
        disc[s] = time;
        low[s] = time;
        time += 1;
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(s, None, 0)];
        while let Some(&mut (v, parent, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if Some(w) == parent {
                    continue;
                }
                if disc[w] == usize::MAX {
                    estack.push(pair(v, w));
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, Some(v), 0));
                } else if disc[w] < disc[v] {
                    estack.push(pair(v, w));
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(p) = parent {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        let mut comp = Vec::new();
                        while let Some(e) = estack.pop() {
                            comp.push(e);
                            if e == pair(p, v) {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        out.push(comp);
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub candidates: Vec<Graph>,
    /// Edges removed from the input, per candidate.
    pub dropped: Vec<Vec<Pair>>,
    pub truncated: bool,
}

/// Default cap on the number of planar candidates.
pub const CANDIDATE_CAP: usize = 64;
const STATE_CAP: usize = 20_000;

/// Edge sets to remove from `g` to resolve its first non-embeddable path:
/// the path itself, or the conflicting paths on either side.
fn branches(g: &Graph) -> Vec<BTreeSet<Pair>> {
    let Some(block) = biconnected_components(g).into_iter().find(|b| !is_planar(&Graph::new(g.n, b.iter().copied())))
    else {
        return Vec::new();
    };
    let mut verts: Vec<usize> = block.iter().flat_map(|&(u, v)| [u, v]).collect();
    verts.sort_unstable();
    verts.dedup();
    let local = |x: usize| verts.binary_search(&x).unwrap();
    let sub = Graph::new(verts.len(), block.iter().map(|&(u, v)| (local(u), local(v))));
    let Ok(palm) = dfs_palm(&sub) else { return Vec::new() };
    let Ok(dec) = find_paths(&palm) else { return Vec::new() };
    let glob = |e: Pair| pair(verts[e.0], verts[e.1]);
    let mut embedded: BTreeSet<Pair> = dec.cycle.edges().into_iter().collect();
    let mut state = EmbeddingState::default();
    for (id, p) in dec.paths.iter().enumerate() {
        let mut trial = embedded.clone();
        trial.extend(p.edges());
        let (i1, j1) = (p.start, p.end);
        if is_planar(&Graph::new(sub.n, trial.iter().copied())) {
            let side = if admissible_side(&state, i1, j1, Side::Left) {
                Side::Left
            } else if admissible_side(&state, i1, j1, Side::Right) {
                Side::Right
            } else {
                let moved = state.conflicts(i1, j1, Side::Left);
                let (stay, go): (Vec<_>, Vec<_>) = state.left.iter().partition(|(_, q)| !moved.contains(q));
                state.left = stay;
                state.right.extend(go);
                Side::Left
            };
            state.push(j1, id, side);
            embedded = trial;
            continue;
        }
        let back = |q: usize| glob(dec.paths[q].back_edge());
        let mut out = vec![BTreeSet::from([glob(p.back_edge())])];
        for side in [Side::Left, Side::Right] {
            let b: BTreeSet<Pair> = state.conflicts(i1, j1, side).into_iter().map(back).collect();
            if !b.is_empty() {
                out.push(b);
            }
        }
        // Greedy blocking set when the side stacks do not explain the conflict.
        let mut b: Vec<usize> = Vec::new();
        for q in (0..id).rev() {
            let rest: BTreeSet<Pair> = trial
                .iter()
                .copied()
                .filter(|&e| !b.iter().chain([&q]).any(|&x| dec.paths[x].back_edge() == e))
                .collect();
            b.push(q);
            if is_planar(&Graph::new(sub.n, rest)) {
                break;
            }
        }
        let mut k = 0;
        while k < b.len() {
            let without: Vec<usize> = b.iter().copied().filter(|&x| x != b[k]).collect();
            let rest: BTreeSet<Pair> =
                trial.iter().copied().filter(|&e| !without.iter().any(|&x| dec.paths[x].back_edge() == e)).collect();
            if is_planar(&Graph::new(sub.n, rest)) {
                b = without;
            } else {
                k += 1;
            }
        }
        if !b.is_empty() {
            out.push(b.into_iter().map(back).collect());
        }
        out.dedup();
        return out;
    }
    Vec::new()
}

/// Maximal planar subgraphs (among those reached) of `g` that keep every
/// `protected` edge. A planar input is returned as is. Candidates come out in order of fewest removed
/// edges, then lexicographically by the removed set.
pub fn embed_or_split(g: &Graph, protected: &BTreeSet<Pair>, cap: usize) -> Result<CandidateSet> {
    if is_planar(g) {
        return Ok(CandidateSet { candidates: vec![g.clone()], dropped: vec![Vec::new()], truncated: false });
    }
    let mut heap: BinaryHeap<Reverse<(usize, Vec<Pair>)>> = BinaryHeap::new();
    let mut seen: HashSet<Vec<Pair>> = HashSet::new();
    heap.push(Reverse((0, Vec::new())));
    seen.insert(Vec::new());
    let mut candidates = Vec::new();
    let mut dropped = Vec::new();
    let mut truncated = false;
    let mut states = 0;
    while let Some(Reverse((_, drop))) = heap.pop() {
        states += 1;
        if states > STATE_CAP {
            truncated = true;
            break;
        }
        let set: BTreeSet<Pair> = drop.iter().copied().collect();
        let h = g.without(&set);
        if is_planar(&h) {
            if !dropped.iter().any(|d: &Vec<Pair>| d.iter().all(|e| set.contains(e))) {
                candidates.push(h);
                dropped.push(drop);
            }
            if candidates.len() >= cap {
                truncated = !heap.is_empty();
                break;
            }
            continue;
        }
        for b in branches(&h) {
            if b.iter().any(|e| protected.contains(e)) {
                continue;
            }
            let mut next = set.clone();
            next.extend(b);
            let key: Vec<Pair> = next.into_iter().collect();
            if seen.insert(key.clone()) {
                heap.push(Reverse((key.len(), key)));
            }
        }
    }
    debug!("planarity: {} candidate(s) after {states} state(s)", candidates.len());
    if candidates.is_empty() {
        return Err(Error::NoCandidate);
    }
    Ok(CandidateSet { candidates, dropped, truncated })
}
