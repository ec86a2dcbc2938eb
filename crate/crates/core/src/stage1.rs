//! Stage 1: an integer-resistance initial guess on the maximal planar
//! graph, the relaxed switch optimization over the gadget network, the
//! Round-Down rounding, and collapse of the rounded gadgets into the
//! auxiliary boundary-only network.

use std::collections::{BTreeMap, BTreeSet};

use log::{debug, info};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constraints;
use crate::dccp::{CcpOptions, CcpReport, DcProblem, Domain};
use crate::error::{Error, Result};
use crate::fit::{solve_fit, FitProblem, Targets};
use crate::measurements::MeasurementSet;
use crate::mprsn::Mprsn;
use crate::netcore::{all_pairs, component_distances, components, pair, Network, Pair};

/// Why a pair could not be acted upon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage1Signal {
    GuardViolated,
    Exhausted,
    BothInvalid,
}

/// Pair with the largest absolute error outside `exclude`; ties go to the
/// lexicographically smaller pair.
pub fn indexmax(errors: &BTreeMap<Pair, f64>, exclude: &BTreeSet<Pair>) -> std::result::Result<Pair, Stage1Signal> {
    let mut best: Option<(Pair, f64)> = None;
    for (&p, &e) in errors {
        if exclude.contains(&p) {
            continue;
        }
        let a = e.abs();
        if best.is_none_or(|(_, b)| a > b || (a.is_nan() && !b.is_nan())) {
            best = Some((p, a));
        }
    }
    best.map(|b| b.0).ok_or(Stage1Signal::Exhausted)
}

/// Integer-resistance boundary network used by the initial-guess loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessState {
    pub n_b: usize,
    pub r_max: u32,
    /// Edge resistances in ohms.
    pub edges: BTreeMap<Pair, u32>,
    pub deleted: BTreeSet<Pair>,
    pub added: BTreeSet<Pair>,
    pub iteration: usize,
}

impl GuessState {
    /// Every edge of `topology` at 1 ohm.
    pub fn new(n_b: usize, r_max: u32, topology: &[Pair]) -> Self {
        Self {
            n_b,
            r_max,
            edges: topology.iter().map(|&p| (p, 1)).collect(),
            deleted: BTreeSet::new(),
            added: BTreeSet::new(),
            iteration: 0,
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.keys().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn network(&self) -> Result<Network<f64>> {
        Network::new(self.n_b, 0, self.edges.iter().map(|(&(u, v), &r)| (u, v, 1.0 / r as f64)))
    }

    pub fn is_connected(&self) -> bool {
        components(self.n_b, self.edges.keys().copied()).iter().all(|&c| c == 0)
    }

    /// `model - target` over every target pair; infinite across a cut.
    pub fn errors(&self, targets: &BTreeMap<Pair, f64>) -> Result<BTreeMap<Pair, f64>> {
        let pairs: Vec<Pair> = targets.keys().copied().collect();
        let d = component_distances(&self.network()?, &pairs)?;
        Ok(pairs.iter().zip(d).map(|(p, x)| (*p, x.to_f64() - targets[p])).collect())
    }
}

/// A tentative operation and the error it leaves on its pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub state: GuessState,
    pub error: f64,
    /// `|error|` strictly below the error before the operation.
    pub valid: bool,
}

fn candidate(state: GuessState, p: Pair, before: f64, targets: &BTreeMap<Pair, f64>) -> Result<Candidate> {
    let d = component_distances(&state.network()?, &[p])?[0].to_f64();
    let error = d - targets[&p];
    Ok(Candidate { valid: error.abs() < before.abs(), state, error })
}

fn error_of(errors: &BTreeMap<Pair, f64>, p: Pair) -> f64 {
    errors.get(&p).copied().unwrap_or(0.0)
}

/// Edge deletion. Refused when an endpoint has degree 1 or the graph
/// would fall apart.
pub fn op1_delete(
    s: &GuessState,
    p: Pair,
    errors: &BTreeMap<Pair, f64>,
    targets: &BTreeMap<Pair, f64>,
) -> Result<std::result::Result<Candidate, Stage1Signal>> {
    if !s.edges.contains_key(&p) || s.degree(p.0) == 1 || s.degree(p.1) == 1 {
        return Ok(Err(Stage1Signal::GuardViolated));
    }
    let mut n = s.clone();
    n.edges.remove(&p);
    if !n.is_connected() {
        return Ok(Err(Stage1Signal::GuardViolated));
    }
    if !n.added.remove(&p) {
        n.deleted.insert(p);
    }
    candidate(n, p, error_of(errors, p), targets).map(Ok)
}

/// Raise the edge resistance by one ohm (below `r_max` only).
pub fn op2_increase(
    s: &GuessState,
    p: Pair,
    errors: &BTreeMap<Pair, f64>,
    targets: &BTreeMap<Pair, f64>,
) -> Result<std::result::Result<Candidate, Stage1Signal>> {
    match s.edges.get(&p) {
        Some(&r) if r < s.r_max => {
            let mut n = s.clone();
            n.edges.insert(p, r + 1);
            candidate(n, p, error_of(errors, p), targets).map(Ok)
        }
        _ => Ok(Err(Stage1Signal::GuardViolated)),
    }
}

/// Add a 1 ohm edge where none exists.
pub fn op3_add(
    s: &GuessState,
    p: Pair,
    errors: &BTreeMap<Pair, f64>,
    targets: &BTreeMap<Pair, f64>,
) -> Result<std::result::Result<Candidate, Stage1Signal>> {
    if s.edges.contains_key(&p) {
        return Ok(Err(Stage1Signal::GuardViolated));
    }
    let mut n = s.clone();
    n.edges.insert(p, 1);
    if !n.deleted.remove(&p) {
        n.added.insert(p);
    }
    candidate(n, p, error_of(errors, p), targets).map(Ok)
}

/// Lower the edge resistance by one ohm (needs at least 2 ohm).
pub fn op4_decrease(
    s: &GuessState,
    p: Pair,
    errors: &BTreeMap<Pair, f64>,
    targets: &BTreeMap<Pair, f64>,
) -> Result<std::result::Result<Candidate, Stage1Signal>> {
    match s.edges.get(&p) {
        Some(&r) if r >= 2 => {
            let mut n = s.clone();
            n.edges.insert(p, r - 1);
            candidate(n, p, error_of(errors, p), targets).map(Ok)
        }
        _ => Ok(Err(Stage1Signal::GuardViolated)),
    }
}

/// Picks between a deletion and an increase: the valid one with the
/// smaller error, or the only valid one.
pub fn op_select(
    c1: std::result::Result<Candidate, Stage1Signal>,
    c2: std::result::Result<Candidate, Stage1Signal>,
) -> std::result::Result<Candidate, Stage1Signal> {
    let ok = |c: std::result::Result<Candidate, Stage1Signal>| c.ok().filter(|c| c.valid);
    match (ok(c1), ok(c2)) {
        (Some(a), Some(b)) => Ok(if b.error.abs() < a.error.abs() { b } else { a }),
        (Some(a), None) => Ok(a),
        (None, Some(b)) => Ok(b),
        (None, None) => Err(Stage1Signal::BothInvalid),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuessStop {
    Tolerance,
    Exhausted,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessReport {
    pub state: GuessState,
    pub rho0: Vec<f64>,
    pub max_error: f64,
    pub committed: usize,
    pub stop: GuessStop,
}

/// Target distance for every boundary pair: measured where available,
/// estimated otherwise.
pub fn boundary_targets(ms: &MeasurementSet, estimate: &DMatrix<f64>) -> BTreeMap<Pair, f64> {
    all_pairs(ms.n_b()).into_iter().map(|(i, j)| (pair(i, j), ms.distance(i, j).unwrap_or(estimate[(i, j)]))).collect()
}

/// Greedy integer-resistance search on the base graph, then encoding of
/// the result into switch positions. Only base-graph edges can be added
/// back, so that the result stays representable by the gadgets.
pub fn build_initial_guess(m: &Mprsn, targets: &BTreeMap<Pair, f64>, eps: f64) -> Result<GuessReport> {
    let base = m.base_edges();
    let allowed: BTreeSet<Pair> = base.iter().copied().collect();
    let mut state = GuessState::new(m.n_b(), m.r_max().floor() as u32, base);
    let cap = 50 * base.len();
    let mut visited = BTreeSet::from([state.edges.clone()]);
    let mut committed = 0;
    let stop = loop {
        let errors = state.errors(targets)?;
        let worst = errors.values().fold(0.0f64, |a, e| a.max(e.abs()));
        if worst <= eps {
            break GuessStop::Tolerance;
        }
        if committed >= cap {
            break GuessStop::IterationCap;
        }
        let mut exclude = BTreeSet::new();
        let next = loop {
            let p = match indexmax(&errors, &exclude) {
                Ok(p) => p,
                Err(_) => break None,
            };
            exclude.insert(p);
            let e = errors[&p];
            let present = state.edges.contains_key(&p);
            let cand = if e < 0.0 && present {
                op_select(op1_delete(&state, p, &errors, targets)?, op2_increase(&state, p, &errors, targets)?)
            } else if e > 0.0 && !present && allowed.contains(&p) {
                op3_add(&state, p, &errors, targets)?.and_then(|c| {
                    if c.valid {
                        Ok(c)
                    } else {
                        Err(Stage1Signal::BothInvalid)
                    }
                })
            } else if e > 0.0 && present {
                op4_decrease(&state, p, &errors, targets)?.and_then(|c| {
                    if c.valid {
                        Ok(c)
                    } else {
                        Err(Stage1Signal::BothInvalid)
                    }
                })
            } else {
                Err(Stage1Signal::GuardViolated)
            };
            if let Ok(c) = cand {
                if visited.insert(c.state.edges.clone()) {
                    break Some(c.state);
                }
            }
        };
        match next {
            Some(mut s) => {
                committed += 1;
                s.iteration = committed;
                state = s;
            }
            None => break GuessStop::Exhausted,
        }
    };
    let errors = state.errors(targets)?;
    let max_error = errors.values().fold(0.0f64, |a, e| a.max(e.abs()));
    debug!("initial guess: {committed} operations, max error {max_error:.4}, stop {stop:?}");
    let res: Vec<Option<f64>> = base.iter().map(|p| state.edges.get(p).map(|&r| r as f64)).collect();
    let rho0 = m.encode(&res)?;
    Ok(GuessReport { state, rho0, max_error, committed, stop })
}

/// Switch-optimization problem over the gadget network.
pub fn pi1_problem(m: &Mprsn, ms: &MeasurementSet, estimate: &DMatrix<f64>) -> Result<FitProblem> {
    let model = m.model()?;
    let targets = Targets::from_measurements(ms, estimate);
    let mut domain = Domain::uniform(m.switch_count(), 0.0, 1.0);
    domain.groups = m.tap_groups();
    Ok(FitProblem::new(model, targets, None, constraints::generate_all(ms), domain))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchSolution {
    pub rho: Vec<f64>,
    pub weights: Vec<f64>,
    pub objective: f64,
    pub report: CcpReport,
}

pub fn solve_pi1(problem: &mut FitProblem, rho0: &[f64], opts: &CcpOptions) -> Result<SwitchSolution> {
    let out = solve_fit(problem, rho0, opts)?;
    Ok(SwitchSolution { rho: out.v, weights: out.weights, objective: out.objective, report: out.report })
}

fn fractional(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// Slack of a rounded point: nonnegative when the inequalities hold within
/// `eps`, the boundary is connected and at most one tap per gadget is
/// closed; `-inf` on a tap conflict or a disconnected boundary.
fn slack(problem: &FitProblem, q: &[f64], eps: f64) -> f64 {
    let groups_ok = problem.domain().groups.iter().all(|g| q[g.clone()].iter().filter(|&&x| x >= 1.0).count() <= 1);
    if groups_ok {
        problem.min_residual(q) + eps
    } else {
        f64::NEG_INFINITY
    }
}

/// Round-Down: one pass over the coordinates in index order. A fractional
/// coordinate goes to 0 when raising it to 1 would increase the objective
/// (`delta > 0`), to 1 otherwise; the choice is reversed if the rounded
/// point breaks the inequalities, disconnects the boundary or closes a
/// second tap in the same gadget. When both values are inadmissible the
/// less violating one is kept. If `rho` was admissible and the pass ends
/// inadmissible, originally fractional coordinates are flipped greedily
/// (largest slack gain first) until the point is admissible again or no
/// flip helps.
pub fn round_down(problem: &FitProblem, rho: &[f64], eps: f64) -> Vec<f64> {
    round_down_with(rho, |q| problem.objective(q), |q| slack(problem, q, eps))
}

/// Round-Down over an arbitrary objective and slack (admissible when
/// `slack >= 0`).
pub fn round_down_with(rho: &[f64], objective: impl Fn(&[f64]) -> f64, slack: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut q = rho.to_vec();
    for i in 0..q.len() {
        if !fractional(q[i]) {
            continue;
        }
        let mut hi = q.clone();
        hi[i] = 1.0;
        let mut lo = q.clone();
        lo[i] = 0.0;
        let delta = objective(&hi) - objective(&lo);
        let (first, second) = if delta > 0.0 { (lo, hi) } else { (hi, lo) };
        let (s1, s2) = (slack(&first), slack(&second));
        q = if s1 >= 0.0 || s1 >= s2 { first } else { second };
    }
    let mut cur = slack(&q);
    if cur >= 0.0 || slack(rho) < 0.0 {
        return q;
    }
    let free: Vec<usize> = (0..q.len()).filter(|&i| fractional(rho[i])).collect();
    while cur < 0.0 {
        let best = free
            .iter()
            .map(|&i| {
                let mut t = q.clone();
                t[i] = 1.0 - t[i];
                (slack(&t), i)
            })
            .max_by(|a, b| a.0.total_cmp(&b.0));
        match best {
            Some((s, i)) if s > cur => {
                q[i] = 1.0 - q[i];
                cur = s;
            }
            _ => break,
        }
    }
    q
}

/// Collapses every gadget of the rounded switch vector into one edge of
/// its series-parallel resistance; open gadgets give no edge.
pub fn extract_aux(m: &Mprsn, x: &[f64]) -> Result<Network<f64>> {
    if x.len() != m.switch_count() {
        return Err(Error::DimensionMismatch { expected: m.switch_count(), actual: x.len() });
    }
    let b: Vec<bool> = x.iter().map(|&v| v >= 0.5).collect();
    let mut edges = Vec::new();
    for (g, &(u, v)) in m.base_edges().iter().enumerate() {
        if let Some(r) = m.gadget_resistance(g, &b).finite() {
            edges.push((u, v, *r.denom() as f64 / *r.numer() as f64));
        }
    }
    Network::new(m.n_b(), 0, edges)
}

/// Connectivity check on the auxiliary network.
pub fn check_aux(aux: &Network<f64>) -> Result<()> {
    if aux.is_connected() {
        Ok(())
    } else {
        Err(Error::Disconnected)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stage1Config {
    pub guess_eps: Option<f64>,
    pub ccp: CcpOptions,
}

#[derive(Debug, Clone)]
pub struct Stage1Output {
    pub mprsn: Mprsn,
    pub guess: GuessReport,
    pub relaxed: SwitchSolution,
    pub rounded: Vec<f64>,
    pub objective_guess: f64,
    pub objective_rounded: f64,
    pub aux: Network<f64>,
    /// Whether `aux` had to be replaced by the initial-guess network.
    pub aux_fallback: bool,
}

/// Whole stage from measurements and a boundary distance estimate.
pub fn run(ms: &MeasurementSet, estimate: &DMatrix<f64>, cfg: &Stage1Config) -> Result<Stage1Output> {
    let m = crate::mprsn::build_mprsn(ms.n_b(), ms.r_max())?;
    let targets = boundary_targets(ms, estimate);
    let eps = cfg.guess_eps.unwrap_or(0.05 * ms.max_distance());
    let guess = build_initial_guess(&m, &targets, eps)?;
    let mut problem = pi1_problem(&m, ms, estimate)?;
    let objective_guess = problem.objective(&guess.rho0);
    info!("stage 1: initial guess objective {objective_guess:.6e}");
    let relaxed = solve_pi1(&mut problem, &guess.rho0, &cfg.ccp)?;
    info!("stage 1: relaxed objective {:.6e}", relaxed.objective);
    let rounded = round_down(&problem, &relaxed.rho, cfg.ccp.eps_feas);
    let objective_rounded = problem.objective(&rounded);
    info!("stage 1: rounded objective {objective_rounded:.6e}");
    let mut aux = extract_aux(&m, &rounded)?;
    let mut aux_fallback = false;
    if let Err(e) = check_aux(&aux) {
        debug!("stage1: {e}; using the initial-guess network instead");
        aux = guess.state.network()?;
        aux_fallback = true;
    }
    Ok(Stage1Output { mprsn: m, guess, relaxed, rounded, objective_guess, objective_rounded, aux, aux_fallback })
}
