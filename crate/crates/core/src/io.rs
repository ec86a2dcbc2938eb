//! JSON file formats and DOT export.
//!
//! Every node label written to or read from a file is 1-based; the library
//! itself is 0-based. Floats are written in shortest round-trip form, and
//! non-finite values as the strings `"Infinity"`, `"-Infinity"`, `"NaN"`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dccp::CcpReport;
use crate::error::{Error, Result};
use crate::estimator::DistanceEstimate;
use crate::interiors::{Hat, Placement, Split, Stage2Output};
use crate::measurements::MeasurementSet;
use crate::netcore::{pair, Network, Pair};
use crate::pipeline::{PipelineConfig, PipelineResult, RunReport};
use crate::planarity::{CandidateSet, Graph};
use crate::rewire::{CandidateResult, Stage4Output};
use crate::stage1::{GuessStop, Stage1Output};

/// Serde adapter for `f64` that keeps infinities and NaN.
pub mod float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("NaN")
        } else if *x > 0.0 {
            s.serialize_str("Infinity")
        } else {
            s.serialize_str("-Infinity")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "Infinity" => Ok(f64::INFINITY),
                "-Infinity" => Ok(f64::NEG_INFINITY),
                "NaN" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("expected a number, got \"{t}\""))),
            },
        }
    }
}

fn label(v: usize) -> usize {
    v + 1
}

fn unlabel(v: usize, n: usize) -> Result<usize> {
    if v == 0 || v > n {
        return Err(Error::Parse(format!("node label {v} outside 1..={n}")));
    }
    Ok(v - 1)
}

fn labels(p: Pair) -> [usize; 2] {
    [label(p.0), label(p.1)]
}

fn unlabels(p: [usize; 2], n: usize) -> Result<Pair> {
    let (u, v) = (unlabel(p[0], n)?, unlabel(p[1], n)?);
    if u == v {
        return Err(Error::Parse(format!("self-loop at node {}", p[0])));
    }
    Ok(pair(u, v))
}

fn weighted(edges: &[Pair], values: &[f64]) -> Vec<WeightedEdge> {
    edges.iter().zip(values).map(|(&(u, v), &g)| WeightedEdge { u: label(u), v: label(v), g }).collect()
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementsJson {
    pub n_b: usize,
    pub n_i: usize,
    pub available: Vec<usize>,
    /// `[i, j, ohms]` triples.
    pub distances: Vec<(usize, usize, f64)>,
    pub kirchhoff_index: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

impl From<&MeasurementSet> for MeasurementsJson {
    fn from(ms: &MeasurementSet) -> Self {
        Self {
            n_b: ms.n_b(),
            n_i: ms.n_i(),
            available: ms.available().iter().map(|&v| label(v)).collect(),
            distances: ms.distances().iter().map(|(&(i, j), &d)| (label(i), label(j), d)).collect(),
            kirchhoff_index: ms.kirchhoff_index(),
            gamma_min: ms.gamma_min(),
            gamma_max: ms.gamma_max(),
        }
    }
}

impl MeasurementsJson {
    pub fn to_measurements(&self) -> Result<MeasurementSet> {
        let n = self.n_b;
        let available = self.available.iter().map(|&v| unlabel(v, n)).collect::<Result<Vec<_>>>()?;
        let distances = self
            .distances
            .iter()
            .map(|&(i, j, d)| Ok((unlabel(i, n)?, unlabel(j, n)?, d)))
            .collect::<Result<Vec<_>>>()?;
        MeasurementSet::new(n, self.n_i, available, distances, self.kirchhoff_index, self.gamma_min, self.gamma_max)
    }
}

pub fn parse_measurements(text: &str) -> Result<MeasurementSet> {
    parse::<MeasurementsJson>(text)?.to_measurements()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub u: usize,
    pub v: usize,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkJson {
    pub n_b: usize,
    pub n_i: usize,
    pub edges: Vec<WeightedEdge>,
}

impl From<&Network<f64>> for NetworkJson {
    fn from(net: &Network<f64>) -> Self {
        Self { n_b: net.n_b(), n_i: net.n_i(), edges: weighted(&net.pairs(), &net.conductances()) }
    }
}

impl NetworkJson {
    pub fn to_network(&self) -> Result<Network<f64>> {
        let n = self.n_b + self.n_i;
        let edges =
            self.edges.iter().map(|e| Ok((unlabel(e.u, n)?, unlabel(e.v, n)?, e.g))).collect::<Result<Vec<_>>>()?;
        Network::new(self.n_b, self.n_i, edges)
    }
}

pub fn parse_network(text: &str) -> Result<Network<f64>> {
    parse::<NetworkJson>(text)?.to_network()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateJson {
    /// Full boundary distance matrix, row-major.
    pub r: Vec<Vec<f64>>,
    pub x: Vec<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
    #[serde(with = "float")]
    pub min_constraint: f64,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("matrix is not square".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl From<&DistanceEstimate> for EstimateJson {
    fn from(e: &DistanceEstimate) -> Self {
        Self {
            r: rows(&e.r),
            x: rows(&e.x),
            residual: e.residual,
            iterations: e.iterations,
            min_constraint: e.min_constraint,
        }
    }
}

impl EstimateJson {
    pub fn to_estimate(&self) -> Result<DistanceEstimate> {
        Ok(DistanceEstimate {
            x: matrix(&self.x)?,
            r: matrix(&self.r)?,
            residual: self.residual,
            iterations: self.iterations,
            min_constraint: self.min_constraint,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1Json {
    pub base_edges: Vec<[usize; 2]>,
    pub switch_count: usize,
    /// Resistance per base edge in the initial guess (absent edges omitted).
    pub guess_resistances: Vec<WeightedEdge>,
    pub guess_stop: GuessStop,
    pub guess_max_error: f64,
    pub rho_guess: Vec<f64>,
    pub rho: Vec<f64>,
    pub weights: Vec<f64>,
    pub x: Vec<f64>,
    #[serde(with = "float")]
    pub objective_guess: f64,
    #[serde(with = "float")]
    pub objective_relaxed: f64,
    #[serde(with = "float")]
    pub objective_rounded: f64,
    pub report: CcpReport,
    pub aux: NetworkJson,
    pub aux_fallback: bool,
}

impl From<&Stage1Output> for Stage1Json {
    fn from(s: &Stage1Output) -> Self {
        Self {
            base_edges: s.mprsn.base_edges().iter().map(|&p| labels(p)).collect(),
            switch_count: s.mprsn.switch_count(),
            guess_resistances: s
                .guess
                .state
                .edges
                .iter()
                .map(|(&(u, v), &r)| WeightedEdge { u: label(u), v: label(v), g: f64::from(r) })
                .collect(),
            guess_stop: s.guess.stop,
            guess_max_error: s.guess.max_error,
            rho_guess: s.guess.rho0.clone(),
            rho: s.relaxed.rho.clone(),
            weights: s.relaxed.weights.clone(),
            x: s.rounded.clone(),
            objective_guess: s.objective_guess,
            objective_relaxed: s.relaxed.objective,
            objective_rounded: s.objective_rounded,
            report: s.relaxed.report.clone(),
            aux: (&s.aux).into(),
            aux_fallback: s.aux_fallback,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitJson {
    pub edge: [usize; 2],
    pub node: usize,
    pub resistance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementJson {
    pub n_b: usize,
    pub on_edge: Vec<SplitJson>,
    pub dangling: Vec<usize>,
}

impl From<&Placement> for PlacementJson {
    fn from(p: &Placement) -> Self {
        Self {
            n_b: p.n_b,
            on_edge: p
                .on_edge
                .iter()
                .map(|s| SplitJson { edge: labels(s.edge), node: label(s.node), resistance: s.resistance })
                .collect(),
            dangling: p.dangling.iter().map(|&v| label(v)).collect(),
        }
    }
}

impl PlacementJson {
    pub fn to_placement(&self) -> Result<Placement> {
        let n = self.n_b + self.on_edge.len() + self.dangling.len();
        Ok(Placement {
            n_b: self.n_b,
            on_edge: self
                .on_edge
                .iter()
                .map(|s| {
                    Ok(Split { edge: unlabels(s.edge, self.n_b)?, node: unlabel(s.node, n)?, resistance: s.resistance })
                })
                .collect::<Result<_>>()?,
            dangling: self.dangling.iter().map(|&v| unlabel(v, n)).collect::<Result<_>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HatJson {
    pub n_b: usize,
    pub n_i: usize,
    /// Edges inherited from the auxiliary network, with conductances.
    pub aux_edges: Vec<WeightedEdge>,
    pub extra_edges: Vec<[usize; 2]>,
}

impl From<&Hat> for HatJson {
    fn from(h: &Hat) -> Self {
        Self {
            n_b: h.n_b,
            n_i: h.n_i,
            aux_edges: h.aux_edges.iter().map(|(&(u, v), &g)| WeightedEdge { u: label(u), v: label(v), g }).collect(),
            extra_edges: h.extra_edges.iter().map(|&p| labels(p)).collect(),
        }
    }
}

impl HatJson {
    pub fn to_hat(&self) -> Result<Hat> {
        let n = self.n_b + self.n_i;
        Ok(Hat {
            n_b: self.n_b,
            n_i: self.n_i,
            aux_edges: self.aux_edges.iter().map(|e| Ok((unlabels([e.u, e.v], n)?, e.g))).collect::<Result<_>>()?,
            extra_edges: self.extra_edges.iter().map(|&p| unlabels(p, n)).collect::<Result<_>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorsJson {
    /// Refitted auxiliary conductances.
    pub edges: Vec<WeightedEdge>,
    #[serde(with = "float")]
    pub objective: f64,
    #[serde(with = "float")]
    pub initial_objective: f64,
    pub zero_edges: Vec<[usize; 2]>,
    pub report: CcpReport,
    pub placement: PlacementJson,
    pub hat: HatJson,
}

impl From<&Stage2Output> for InteriorsJson {
    fn from(s: &Stage2Output) -> Self {
        Self {
            edges: weighted(&s.pi2.edges, &s.pi2.conductances),
            objective: s.pi2.objective,
            initial_objective: s.pi2.initial_objective,
            zero_edges: s.pi2.zero_edges.iter().map(|&p| labels(p)).collect(),
            report: s.pi2.report.clone(),
            placement: (&s.placement).into(),
            hat: (&s.hat).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        Self { n: g.n, edges: g.edges.iter().map(|&p| labels(p)).collect() }
    }
}

impl GraphJson {
    pub fn to_graph(&self) -> Result<Graph> {
        let edges = self.edges.iter().map(|&p| unlabels(p, self.n)).collect::<Result<Vec<_>>>()?;
        Ok(Graph::new(self.n, edges))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatesJson {
    pub graphs: Vec<GraphJson>,
    /// Edges removed from the input graph, per candidate.
    pub dropped: Vec<Vec<[usize; 2]>>,
    pub truncated: bool,
}

impl From<&CandidateSet> for CandidatesJson {
    fn from(c: &CandidateSet) -> Self {
        Self {
            graphs: c.candidates.iter().map(Into::into).collect(),
            dropped: c.dropped.iter().map(|d| d.iter().map(|&p| labels(p)).collect()).collect(),
            truncated: c.truncated,
        }
    }
}

impl CandidatesJson {
    pub fn to_candidates(&self) -> Result<CandidateSet> {
        let candidates = self.graphs.iter().map(GraphJson::to_graph).collect::<Result<Vec<_>>>()?;
        let n = candidates.first().map_or(0, |g| g.n);
        Ok(CandidateSet {
            candidates,
            dropped: self
                .dropped
                .iter()
                .map(|d| d.iter().map(|&p| unlabels(p, n)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?,
            truncated: self.truncated,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResultJson {
    pub network: NetworkJson,
    #[serde(with = "float")]
    pub objective: f64,
    pub feasible: bool,
    pub report: CcpReport,
}

impl From<&CandidateResult> for CandidateResultJson {
    fn from(r: &CandidateResult) -> Self {
        Self {
            network: NetworkJson { n_b: r.n_b, n_i: r.n_i, edges: weighted(&r.edges, &r.conductances) },
            objective: r.objective,
            feasible: r.feasible,
            report: r.report.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewireJson {
    pub results: Vec<CandidateResultJson>,
    /// Position of the selected result in `results` (0-based).
    pub best: usize,
    pub unplaced: Vec<usize>,
}

impl From<&Stage4Output> for RewireJson {
    fn from(s: &Stage4Output) -> Self {
        Self {
            results: s.results.iter().map(Into::into).collect(),
            best: s.best,
            unplaced: s.unplaced.iter().map(|&v| label(v)).collect(),
        }
    }
}

/// Output of `reconstruct` and of every stage command; sections are present
/// up to the last stage that ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultJson {
    pub config: PipelineConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage1: Option<Stage1Json>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interiors: Option<InteriorsJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<CandidatesJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewire: Option<RewireJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkJson>,
    #[serde(default)]
    pub report: RunReport,
}

impl ResultJson {
    pub fn new(res: &PipelineResult, cfg: &PipelineConfig) -> Self {
        Self {
            config: cfg.clone(),
            estimate: Some((&res.estimate).into()),
            stage1: res.stage1.as_ref().map(Into::into),
            interiors: res.stage2.as_ref().map(Into::into),
            candidates: res.candidates.as_ref().map(Into::into),
            rewire: res.stage4.as_ref().map(Into::into),
            network: res.network().as_ref().map(Into::into),
            report: res.report.clone(),
        }
    }
}

fn dot_header(s: &mut String, name: &str, n_b: usize, n: usize) {
    let _ = writeln!(s, "graph {name} {{");
    for v in 0..n {
        let shape = if v < n_b { "doublecircle" } else { "circle" };
        let _ = writeln!(s, "  {} [shape={shape}];", label(v));
    }
}

/// DOT text of a network; edges are labelled with their resistance.
pub fn network_dot(net: &Network<f64>, name: &str) -> String {
    let mut s = String::new();
    dot_header(&mut s, name, net.n_b(), net.node_count());
    for e in net.edges() {
        let _ = writeln!(s, "  {} -- {} [label=\"{:.4}\"];", label(e.u), label(e.v), 1.0 / e.conductance);
    }
    s.push_str("}\n");
    s
}

/// DOT text of the expanded auxiliary graph; added interior edges are dashed.
pub fn hat_dot(h: &Hat, name: &str) -> String {
    let mut s = String::new();
    dot_header(&mut s, name, h.n_b, h.node_count());
    let aux: BTreeSet<Pair> = h.protected();
    for p in h.edges() {
        let style = if aux.contains(&p) {
            format!("label=\"{:.4}\"", 1.0 / h.aux_edges[&p])
        } else {
            "style=dashed".to_string()
        };
        let _ = writeln!(s, "  {} -- {} [{style}];", label(p.0), label(p.1));
    }
    s.push_str("}\n");
    s
}
