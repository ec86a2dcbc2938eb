//! End-to-end reconstruction.

use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::dccp::CcpOptions;
use crate::error::Result;
use crate::estimator::{self, DistanceEstimate};
use crate::interiors::{self, Hat, Stage2Output};
use crate::measurements::MeasurementSet;
use crate::netcore::Network;
use crate::planarity::{self, CandidateSet, Graph, CANDIDATE_CAP};
use crate::rewire::{self, Stage4Output};
use crate::stage1::{self, Stage1Config, Stage1Output};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Estimate,
    Stage1,
    Interiors,
    Planarize,
    Rewire,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub ccp: CcpOptions,
    /// Stop tolerance of the initial-guess loop; `None` means 5% of the
    /// largest measured distance.
    pub guess_eps: Option<f64>,
    pub candidate_cap: usize,
    /// Last stage to run.
    pub stop_after: Stage,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            ccp: CcpOptions::default(),
            guess_eps: None,
            candidate_cap: CANDIDATE_CAP,
            stop_after: Stage::Rewire,
        }
    }
}

impl PipelineConfig {
    pub fn ccp(&self) -> CcpOptions {
        CcpOptions { seed: self.seed, ..self.ccp.clone() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// `(stage, seconds)`.
    pub timings: Vec<(Stage, f64)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub estimate: DistanceEstimate,
    pub stage1: Option<Stage1Output>,
    pub stage2: Option<Stage2Output>,
    pub candidates: Option<CandidateSet>,
    pub stage4: Option<Stage4Output>,
    pub report: RunReport,
}

impl PipelineResult {
    /// The reconstructed network, when the last stage ran.
    pub fn network(&self) -> Option<Network<f64>> {
        self.stage4.as_ref().and_then(|s| s.network().ok())
    }
}

impl RunReport {
    fn warn(&mut self, msg: String) {
        warn!("{msg}");
        self.warnings.push(msg);
    }
}

fn timed<T>(report: &mut RunReport, stage: Stage, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let t = Instant::now();
    let name = serde_json::to_value(stage).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let out = f().map_err(|e| e.at(&name));
    report.timings.push((stage, t.elapsed().as_secs_f64()));
    out
}

/// Upstream artifacts to start from instead of recomputing them. A later
/// artifact takes precedence: with `candidates` and `hat` set, only the
/// last stage runs.
#[derive(Debug, Clone, Default)]
pub struct Resume {
    pub aux: Option<Network<f64>>,
    pub hat: Option<Hat>,
    pub candidates: Option<CandidateSet>,
}

pub fn reconstruct(ms: &MeasurementSet, cfg: &PipelineConfig) -> Result<PipelineResult> {
    reconstruct_from(ms, cfg, Resume::default())
}

/// Like [`reconstruct`], skipping the stages whose outputs `resume`
/// provides. Skipped stages are `None` in the result.
pub fn reconstruct_from(ms: &MeasurementSet, cfg: &PipelineConfig, resume: Resume) -> Result<PipelineResult> {
    let mut report = RunReport::default();
    let opts = cfg.ccp();
    let estimate = timed(&mut report, Stage::Estimate, || estimator::estimate(ms))?;
    let mut out = PipelineResult { estimate, stage1: None, stage2: None, candidates: None, stage4: None, report };
    let r = out.estimate.r.clone();
    let have_cands = resume.candidates.is_some() && resume.hat.is_some();
    let have_hat = resume.hat.is_some();
    let mut aux = resume.aux;
    if cfg.stop_after < Stage::Stage1 {
        return Ok(out);
    }
    if aux.is_none() && !have_hat {
        let s1cfg = Stage1Config { guess_eps: cfg.guess_eps, ccp: opts.clone() };
        let s1 = timed(&mut out.report, Stage::Stage1, || stage1::run(ms, &r, &s1cfg))?;
        if s1.aux_fallback {
            out.report.warn("auxiliary network disconnected; initial guess used instead".into());
        }
        aux = Some(s1.aux.clone());
        out.stage1 = Some(s1);
    }
    if cfg.stop_after < Stage::Interiors {
        return Ok(out);
    }
    let hat = match resume.hat {
        Some(h) => h,
        None => {
            let aux = aux.expect("auxiliary network is set when no hat is given");
            let s2 = timed(&mut out.report, Stage::Interiors, || interiors::run(&aux, ms, &r, &opts))?;
            if !s2.pi2.zero_edges.is_empty() {
                out.report.warn(format!("{} auxiliary edge(s) reached zero conductance", s2.pi2.zero_edges.len()));
            }
            let h = s2.hat.clone();
            out.stage2 = Some(s2);
            h
        }
    };
    if cfg.stop_after < Stage::Planarize {
        return Ok(out);
    }
    let list = match resume.candidates.filter(|_| have_cands) {
        Some(c) => c.candidates,
        None => {
            let g = Graph::new(hat.node_count(), hat.edges());
            let cands = timed(&mut out.report, Stage::Planarize, || {
                planarity::embed_or_split(&g, &hat.protected(), cfg.candidate_cap)
            })?;
            if cands.truncated {
                out.report.warn(format!("planar candidate set truncated at {}", cfg.candidate_cap));
            }
            info!("{} planar candidate(s)", cands.candidates.len());
            let list = cands.candidates.clone();
            out.candidates = Some(cands);
            list
        }
    };
    if cfg.stop_after < Stage::Rewire {
        return Ok(out);
    }
    let s4 = timed(&mut out.report, Stage::Rewire, || rewire::run(&list, &hat, ms, &r, &opts))?;
    if !s4.unplaced.is_empty() {
        out.report.warn(format!("{} interior node(s) left unplaced", s4.unplaced.len()));
    }
    out.stage4 = Some(s4);
    Ok(out)
}
