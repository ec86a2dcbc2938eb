//! Maximal circular planar graph and the resistor-switch gadget network
//! built on top of it.
//!
//! Each base edge `(i, j)` becomes a gadget with two parts:
//!
//! * component A: chain nodes `p_1 .. p_{R-1}` (`R = floor(r_max)`) joined
//!   by fixed 1 ohm resistors, plus a switched 1 ohm resistor from `i` to
//!   every `p_s`;
//! * component B: ten taps, tap `q` presenting `1/q` ohm between `p_{R-1}`
//!   and `j` when its connector switch is closed.
//!
//! A tap is wired as two series edges `p_{R-1} - m_q - j`, each of
//! conductance `2q` (the first scaled by the connector switch), so that
//! the whole network stays simple and linear in the switches.
//!
//! The switch vector lists gadgets in base-edge order; within a gadget the
//! chain switches come first (`s = 1 ..`), then the ten connector switches.

use std::fmt::Write as _;
use std::ops::Range;

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};
use crate::model::{LinearModel, ModelEdge};
use crate::netcore::{component_distances, Distance, Network, Pair};

/// Number of taps in component B.
pub const TAPS: usize = 10;

/// Maximal planar graph on `n_b` nodes with the cycle `0-1-..-(n_b-1)-0`
/// as a face boundary: the cycle, a fan of chords from node 0 on one side
/// and a fan from node 1 on the other. `3 n_b - 6` edges.
pub fn maximal_circular_planar(n_b: usize) -> Result<Vec<Pair>> {
    if n_b < 3 {
        return Err(Error::TooFewNodes(n_b));
    }
    let mut e: Vec<Pair> = (0..n_b - 1).map(|i| (i, i + 1)).collect();
    e.push((0, n_b - 1));
    for k in 2..n_b - 1 {
        e.push((0, k));
    }
    for k in 3..n_b {
        e.push((1, k));
    }
    e.sort_unstable();
    e.dedup();
    Ok(e)
}

fn parallel<T: Num + Copy>(a: Distance<T>, b: Distance<T>) -> Distance<T> {
    match (a, b) {
        (Distance::Infinite, x) | (x, Distance::Infinite) => x,
        (Distance::Finite(x), Distance::Finite(y)) => Distance::Finite(x * y / (x + y)),
    }
}

fn series<T: Num + Copy>(a: Distance<T>, b: Distance<T>) -> Distance<T> {
    match (a, b) {
        (Distance::Finite(x), Distance::Finite(y)) => Distance::Finite(x + y),
        _ => Distance::Infinite,
    }
}

/// One resistor-switch gadget between base nodes `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rsn {
    pub i: usize,
    pub j: usize,
    /// Chain length `floor(r_max) - 1`.
    pub chain: usize,
}

pub fn build_rsn(i: usize, j: usize, r_max: f64) -> Result<Rsn> {
    if !r_max.is_finite() || r_max < 2.0 {
        return Err(Error::InvalidRmax(r_max));
    }
    let (i, j) = crate::netcore::pair(i, j);
    Ok(Rsn { i, j, chain: r_max.floor() as usize - 1 })
}

impl Rsn {
    pub fn switch_count(&self) -> usize {
        self.chain + TAPS
    }

    pub fn internal_nodes(&self) -> usize {
        self.chain + TAPS
    }

    /// Resistance of component A (between `i` and `p_{R-1}`) for the given
    /// chain switch states.
    pub fn component_a<T: Num + Copy>(&self, chain: &[bool]) -> Distance<T> {
        let one = Distance::Finite(T::one());
        let mut r = Distance::Infinite;
        for (s, &on) in chain.iter().enumerate().take(self.chain) {
            let link = if on { one } else { Distance::Infinite };
            r = if s == 0 { link } else { parallel(series(r, one), link) };
        }
        r
    }

    /// Total `i`-`j` resistance; infinite when no tap or no chain path is
    /// closed. Multiple closed taps combine in parallel.
    pub fn resistance<T: Num + Copy + FromPrimitive>(&self, switches: &[bool]) -> Distance<T> {
        let a = self.component_a::<T>(&switches[..self.chain]);
        let mut b = Distance::Infinite;
        for (q, &on) in switches[self.chain..self.chain + TAPS].iter().enumerate() {
            if on {
                let tap = Distance::Finite(T::one() / T::from_usize(q + 1).unwrap());
                b = parallel(b, tap);
            }
        }
        series(a, b)
    }

    /// Component-A resistance for every chain state, in binary counting
    /// order (switch `s` is bit `s`).
    pub fn achievable_a<T: Num + Copy>(&self) -> Vec<Distance<T>> {
        (0..1usize << self.chain)
            .map(|mask| {
                let st: Vec<bool> = (0..self.chain).map(|s| mask >> s & 1 == 1).collect();
                self.component_a(&st)
            })
            .collect()
    }

    /// Every finite resistance reachable with exactly one tap closed,
    /// with the switch state producing it.
    pub fn achievable<T: Num + Copy + FromPrimitive>(&self) -> Vec<(T, Vec<bool>)> {
        let mut out = Vec::new();
        for mask in 0..1usize << self.chain {
            for q in 0..TAPS {
                let mut st: Vec<bool> = (0..self.chain).map(|s| mask >> s & 1 == 1).collect();
                st.extend((0..TAPS).map(|t| t == q));
                if let Distance::Finite(r) = self.resistance::<T>(&st) {
                    out.push((r, st));
                }
            }
        }
        out
    }
}

/// The full switch network over the maximal circular planar graph.
#[derive(Debug, Clone)]
pub struct Mprsn {
    n_b: usize,
    r_max: f64,
    base: Vec<Pair>,
    gadgets: Vec<Rsn>,
    /// Achievable gadget resistances sorted ascending (shared by all gadgets).
    table: Vec<(f64, Vec<bool>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetEdgeKind {
    ChainSwitch,
    ChainResistor,
    Connector,
    Tap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GadgetEdge {
    pub u: usize,
    pub v: usize,
    pub kind: GadgetEdgeKind,
    /// Conductance when closed (or fixed conductance).
    pub conductance: f64,
    pub switch: Option<usize>,
}

pub fn build_mprsn(n_b: usize, r_max: f64) -> Result<Mprsn> {
    let base = maximal_circular_planar(n_b)?;
    let gadgets = base.iter().map(|&(i, j)| build_rsn(i, j, r_max)).collect::<Result<Vec<_>>>()?;
    let mut table: Vec<(f64, Vec<bool>)> = gadgets[0]
        .achievable::<crate::Rational>()
        .into_iter()
        .map(|(r, s)| (*r.numer() as f64 / *r.denom() as f64, s))
        .collect();
    table.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| a.1.iter().filter(|x| **x).count().cmp(&b.1.iter().filter(|x| **x).count()))
            .then_with(|| b.1.cmp(&a.1))
    });
    Ok(Mprsn { n_b, r_max, base, gadgets, table })
}

impl Mprsn {
    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn base_edges(&self) -> &[Pair] {
        &self.base
    }

    pub fn gadgets(&self) -> &[Rsn] {
        &self.gadgets
    }

    fn per_gadget(&self) -> usize {
        self.gadgets[0].switch_count()
    }

    /// Length of the switch vector.
    pub fn switch_count(&self) -> usize {
        self.gadgets.len() * self.per_gadget()
    }

    pub fn node_count(&self) -> usize {
        self.n_b + self.gadgets.len() * self.gadgets[0].internal_nodes()
    }

    pub fn gadget_switches(&self, g: usize) -> Range<usize> {
        let w = self.per_gadget();
        g * w..(g + 1) * w
    }

    /// Ranges of the one-hot tap connector groups.
    pub fn tap_groups(&self) -> Vec<Range<usize>> {
        let chain = self.gadgets[0].chain;
        (0..self.gadgets.len())
            .map(|g| {
                let r = self.gadget_switches(g);
                r.start + chain..r.end
            })
            .collect()
    }

    /// Index of the gadget on base edge `(u, v)`.
    pub fn gadget_index(&self, u: usize, v: usize) -> Option<usize> {
        self.base.binary_search(&crate::netcore::pair(u, v)).ok()
    }

    /// Every edge of the expanded network.
    pub fn expanded_edges(&self) -> Vec<GadgetEdge> {
        let chain = self.gadgets[0].chain;
        let mut out = Vec::new();
        for (g, rsn) in self.gadgets.iter().enumerate() {
            let off = self.n_b + g * rsn.internal_nodes();
            let sw = self.gadget_switches(g).start;
            let p = |s: usize| off + s;
            let m = |q: usize| off + chain + q;
            for s in 0..chain {
                out.push(GadgetEdge {
                    u: rsn.i,
                    v: p(s),
                    kind: GadgetEdgeKind::ChainSwitch,
                    conductance: 1.0,
                    switch: Some(sw + s),
                });
                if s + 1 < chain {
                    out.push(GadgetEdge {
                        u: p(s),
                        v: p(s + 1),
                        kind: GadgetEdgeKind::ChainResistor,
                        conductance: 1.0,
                        switch: None,
                    });
                }
            }
            for q in 0..TAPS {
                let g2 = 2.0 * (q + 1) as f64;
                out.push(GadgetEdge {
                    u: p(chain - 1),
                    v: m(q),
                    kind: GadgetEdgeKind::Connector,
                    conductance: g2,
                    switch: Some(sw + chain + q),
                });
                out.push(GadgetEdge { u: m(q), v: rsn.j, kind: GadgetEdgeKind::Tap, conductance: g2, switch: None });
            }
        }
        out
    }

    /// Conductances affine in the switch vector.
    pub fn model(&self) -> Result<LinearModel> {
        let edges = self
            .expanded_edges()
            .into_iter()
            .map(|e| match e.switch {
                Some(k) => ModelEdge { u: e.u, v: e.v, base: 0.0, var: Some((k, e.conductance)) },
                None => ModelEdge { u: e.u, v: e.v, base: e.conductance, var: None },
            })
            .collect();
        LinearModel::new(self.node_count(), self.n_b, edges, self.switch_count())
    }

    fn check_rho(&self, rho: &[f64]) -> Result<()> {
        if rho.len() != self.switch_count() {
            return Err(Error::DimensionMismatch { expected: self.switch_count(), actual: rho.len() });
        }
        if rho.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidNetwork("switch values must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Expanded network with switch-scaled conductances; open switches are
    /// dropped.
    pub fn evaluate_switches(&self, rho: &[f64]) -> Result<Network<f64>> {
        self.check_rho(rho)?;
        self.model()?.network(rho)
    }

    /// Distances between all boundary pairs, lexicographic.
    pub fn boundary_resistance_vector(&self, rho: &[f64]) -> Result<Vec<Distance<f64>>> {
        let net = self.evaluate_switches(rho)?;
        component_distances(&net, &crate::netcore::all_pairs(self.n_b))
    }

    /// Exact resistance of gadget `g` under a boolean switch vector.
    pub fn gadget_resistance(&self, g: usize, x: &[bool]) -> Distance<crate::Rational> {
        self.gadgets[g].resistance(&x[self.gadget_switches(g)])
    }

    /// Switch state of one gadget realizing the achievable resistance
    /// nearest to `target` (`None` opens the gadget).
    pub fn encode_gadget(&self, target: Option<f64>) -> Vec<bool> {
        let Some(t) = target else {
            return vec![false; self.per_gadget()];
        };
        let pos = self.table.partition_point(|(r, _)| *r < t);
        let mut best = None::<usize>;
        for c in [pos.wrapping_sub(1), pos] {
            if c < self.table.len() && best.is_none_or(|b| (self.table[c].0 - t).abs() < (self.table[b].0 - t).abs()) {
                best = Some(c);
            }
        }
        self.table[best.unwrap()].1.clone()
    }

    /// Switch vector for per-base-edge resistances (`None` = no edge).
    pub fn encode(&self, resistances: &[Option<f64>]) -> Result<Vec<f64>> {
        if resistances.len() != self.base.len() {
            return Err(Error::DimensionMismatch { expected: self.base.len(), actual: resistances.len() });
        }
        Ok(resistances.iter().flat_map(|r| self.encode_gadget(*r)).map(|b| if b { 1.0 } else { 0.0 }).collect())
    }

    /// DOT text of the base graph.
    pub fn base_dot(&self) -> String {
        let mut s = String::from("graph base {\n");
        for i in 0..self.n_b {
            let _ = writeln!(s, "  {} [shape=doublecircle];", i + 1);
        }
        for &(u, v) in &self.base {
            let _ = writeln!(s, "  {} -- {};", u + 1, v + 1);
        }
        s.push_str("}\n");
        s
    }

    /// DOT text of the expanded network; switches are dashed and labelled
    /// with their index and value.
    pub fn expanded_dot(&self, rho: Option<&[f64]>) -> String {
        let mut s = String::from("graph mprsn {\n");
        for i in 0..self.n_b {
            let _ = writeln!(s, "  {} [shape=doublecircle];", i + 1);
        }
        for e in self.expanded_edges() {
            match e.switch {
                Some(k) => {
                    let val = rho.map(|r| format!(" = {}", r[k])).unwrap_or_default();
                    let _ = writeln!(s, "  {} -- {} [style=dashed, label=\"s{}{}\"];", e.u + 1, e.v + 1, k, val);
                }
                None => {
                    let _ = writeln!(s, "  {} -- {} [label=\"{}\"];", e.u + 1, e.v + 1, 1.0 / e.conductance);
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn base_graph_sizes() {
        assert_eq!(maximal_circular_planar(3).unwrap(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(maximal_circular_planar(4).unwrap(), vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(maximal_circular_planar(6).unwrap().len(), 12);
        assert!(matches!(maximal_circular_planar(2), Err(Error::TooFewNodes(2))));
    }

    #[test]
    fn component_a_set() {
        let g = build_rsn(0, 1, 4.0).unwrap();
        let got = g.achievable_a::<Rational>();
        let want = [
            Distance::Infinite,
            Distance::Finite(r(3, 1)),
            Distance::Finite(r(2, 1)),
            Distance::Finite(r(5, 3)),
            Distance::Finite(r(1, 1)),
            Distance::Finite(r(3, 4)),
            Distance::Finite(r(2, 3)),
            Distance::Finite(r(5, 8)),
        ];
        assert_eq!(got, want);
        let small = build_rsn(0, 1, 2.0).unwrap().achievable_a::<Rational>();
        assert_eq!(small, vec![Distance::Infinite, Distance::Finite(r(1, 1))]);
    }

    #[test]
    fn gadget_range() {
        let g = build_rsn(0, 1, 4.0).unwrap();
        let all = g.achievable::<Rational>();
        let min = all.iter().map(|x| x.0).min().unwrap();
        let max = all.iter().map(|x| x.0).max().unwrap();
        assert_eq!(min, r(29, 40));
        assert_eq!(max, r(4, 1));
        assert!(matches!(build_rsn(0, 1, 1.5), Err(Error::InvalidRmax(_))));
    }

    #[test]
    fn mprsn_counts() {
        let m = build_mprsn(4, 4.0).unwrap();
        assert_eq!(m.gadgets().len(), 6);
        assert_eq!(m.switch_count(), 6 * 13);
        assert_eq!(m.node_count(), 4 + 6 * 13);
        let m = build_mprsn(3, 2.0).unwrap();
        assert_eq!(m.switch_count(), 33);
    }

    fn one_gadget_state(chain: [bool; 3], tap: usize) -> Vec<f64> {
        let mut x: Vec<f64> = chain.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        x.extend((1..=TAPS).map(|q| if q == tap { 1.0 } else { 0.0 }));
        x
    }

    #[test]
    fn expanded_network_resistances() {
        let m = build_mprsn(3, 4.0).unwrap();
        let mut rho = vec![0.0; m.switch_count()];
        let g = m.gadget_index(0, 1).unwrap();
        for (tap, want) in [(10, 0.725), (1, 1.625), (4, 0.875)] {
            rho[m.gadget_switches(g)].copy_from_slice(&one_gadget_state([true; 3], tap));
            let d = m.boundary_resistance_vector(&rho).unwrap();
            assert!((d[0].to_f64() - want).abs() < 1e-12, "tap {tap}");
            assert!(d[1].is_infinite());
        }
        let zero = vec![0.0; m.switch_count()];
        assert!(m.boundary_resistance_vector(&zero).unwrap().iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn encode_round_trip_integers() {
        let m = build_mprsn(4, 4.0).unwrap();
        for t in 1..=4 {
            let st = m.encode_gadget(Some(t as f64));
            assert_eq!(m.gadgets()[0].resistance::<Rational>(&st), Distance::Finite(r(t, 1)));
        }
        assert!(m.encode_gadget(None).iter().all(|b| !b));
    }
}
