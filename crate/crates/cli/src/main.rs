use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rdnet_core::dccp::gradcheck_random;
use rdnet_core::io::{self, hat_dot, network_dot, ResultJson};
use rdnet_core::mprsn::{build_mprsn, build_rsn};
use rdnet_core::netcore::Distance;
use rdnet_core::pipeline::{reconstruct_from, PipelineConfig, Resume, Stage};
use rdnet_core::{Error, MeasurementSet, Rational};

#[derive(Parser)]
#[command(name = "rdnet", version, about = "Reconstruct circular planar resistor networks from boundary measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Estimate,
    Stage1,
    Interiors,
    Planarize,
    Rewire,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::Estimate => Stage::Estimate,
            StageArg::Stage1 => Stage::Stage1,
            StageArg::Interiors => Stage::Interiors,
            StageArg::Planarize => Stage::Planarize,
            StageArg::Rewire => Stage::Rewire,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Measurement JSON file.
    #[arg(long, short)]
    measurements: PathBuf,
    /// Result JSON of an earlier stage to continue from.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Pipeline configuration JSON; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Stop tolerance of the initial-guess search, in ohms.
    #[arg(long)]
    tol: Option<f64>,
    /// Constraint feasibility tolerance.
    #[arg(long)]
    feas_tol: Option<f64>,
    /// Outer iteration cap of every solve.
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    candidate_cap: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole pipeline (or up to --stage).
    Reconstruct {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value = "rewire")]
        stage: StageArg,
    },
    /// Complete the boundary distance matrix.
    Estimate(RunArgs),
    /// Switch optimization; emits the auxiliary network.
    Stage1(RunArgs),
    /// Refit the auxiliary network and place interior nodes.
    PlaceInteriors(RunArgs),
    /// Enumerate planar candidates.
    Planarize(RunArgs),
    /// Fit conductances on each candidate and select the best.
    Rewire(RunArgs),
    /// Check closed-form derivatives against finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the resistances realizable by one switch gadget.
    RsnEnum {
        #[arg(long, default_value_t = 4.0)]
        rmax: f64,
    },
    /// DOT text for a network, a result artifact, or the switch network.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Artifact {
    Network,
    Aux,
    Hat,
    Candidates,
}

#[derive(Args)]
struct PlotArgs {
    /// Network JSON or result JSON.
    input: Option<PathBuf>,
    /// Which artifact of a result JSON to draw.
    #[arg(long, value_enum, default_value = "network")]
    artifact: Artifact,
    /// Draw the base graph on this many boundary nodes instead.
    #[arg(long, conflicts_with = "input")]
    base: Option<usize>,
    /// With --base, draw the expanded switch network.
    #[arg(long, requires = "base")]
    expanded: bool,
    #[arg(long, default_value_t = 4.0)]
    rmax: f64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn config(a: &RunArgs, stage: Stage) -> Result<PipelineConfig, Error> {
    let mut cfg: PipelineConfig = match &a.config {
        Some(p) => io::parse(&read(p)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.tol {
        cfg.guess_eps = Some(t);
    }
    if let Some(t) = a.feas_tol {
        cfg.ccp.eps_feas = t;
    }
    if let Some(m) = a.max_iter {
        cfg.ccp.max_outer = m;
    }
    if let Some(c) = a.candidate_cap {
        cfg.candidate_cap = c;
    }
    cfg.stop_after = stage;
    Ok(cfg)
}

/// Artifacts of `prior` that feed stages after `stage`'s predecessors.
fn resume(prior: &ResultJson, stage: Stage) -> Result<Resume, Error> {
    let mut r = Resume::default();
    if stage > Stage::Stage1 {
        r.aux = prior.stage1.as_ref().map(|s| s.aux.to_network()).transpose()?;
    }
    if stage > Stage::Interiors {
        r.hat = prior.interiors.as_ref().map(|s| s.hat.to_hat()).transpose()?;
    }
    if stage > Stage::Planarize {
        r.candidates = prior.candidates.as_ref().map(|c| c.to_candidates()).transpose()?;
    }
    Ok(r)
}

fn run(a: &RunArgs, stage: Stage) -> Result<(), Error> {
    let ms: MeasurementSet = io::parse_measurements(&read(&a.measurements)?)?;
    let cfg = config(a, stage)?;
    let prior: Option<ResultJson> = a.input.as_deref().map(|p| io::parse(&read(p)?)).transpose()?;
    let res = reconstruct_from(&ms, &cfg, prior.as_ref().map(|p| resume(p, stage)).transpose()?.unwrap_or_default())?;
    let mut out = ResultJson::new(&res, &cfg);
    if let Some(p) = prior {
        out.stage1 = out.stage1.or(p.stage1.filter(|_| stage >= Stage::Stage1));
        out.interiors = out.interiors.or(p.interiors.filter(|_| stage >= Stage::Interiors));
        out.candidates = out.candidates.or(p.candidates.filter(|_| stage >= Stage::Planarize));
    }
    info!("timings: {:?}", out.report.timings);
    let text = match a.format {
        Format::Json => io::to_json(&out)? + "\n",
        Format::Dot => dot_of(&out, stage)?,
    };
    write(a.out.as_deref(), &text)
}

fn dot_of(out: &ResultJson, stage: Stage) -> Result<String, Error> {
    let missing = || Error::Parse("no drawable artifact for this stage".into());
    match stage {
        Stage::Estimate => Err(missing()),
        Stage::Stage1 => Ok(network_dot(&out.stage1.as_ref().ok_or_else(missing)?.aux.to_network()?, "aux")),
        Stage::Interiors => Ok(hat_dot(&out.interiors.as_ref().ok_or_else(missing)?.hat.to_hat()?, "hat")),
        Stage::Planarize => {
            let c = out.candidates.as_ref().ok_or_else(missing)?.to_candidates()?;
            Ok(c.candidates.iter().enumerate().map(|(k, g)| g.to_dot(&format!("candidate{}", k + 1))).collect())
        }
        Stage::Rewire => Ok(network_dot(&out.network.as_ref().ok_or_else(missing)?.to_network()?, "network")),
    }
}

fn rsn_enum(rmax: f64) -> Result<(), Error> {
    let g = build_rsn(0, 1, rmax)?;
    let show = |d: Distance<Rational>| match d {
        Distance::Finite(x) => x.to_string(),
        Distance::Infinite => "inf".into(),
    };
    println!("component A, chain of {} switches:", g.chain);
    println!("{:<8} resistance", "state");
    for (mask, r) in g.achievable_a::<Rational>().into_iter().enumerate() {
        let bits: String = (0..g.chain).map(|s| if mask >> s & 1 == 1 { '1' } else { '0' }).collect();
        println!("{bits:<8} {}", show(r));
    }
    let all: Vec<f64> = g.achievable::<f64>().into_iter().map(|(r, _)| r).collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(0.0, f64::max);
    println!("full gadget: {} finite states, range [{lo:.4}, {hi:.4}]", all.len());
    Ok(())
}

fn plot(a: &PlotArgs) -> Result<(), Error> {
    let text = if let Some(n_b) = a.base {
        let m = build_mprsn(n_b, a.rmax)?;
        if a.expanded {
            m.expanded_dot(None)
        } else {
            m.base_dot()
        }
    } else {
        let path = a.input.as_deref().ok_or_else(|| Error::Parse("plot needs an input file or --base".into()))?;
        let text = read(path)?;
        if let Ok(net) = io::parse_network(&text) {
            network_dot(&net, "network")
        } else {
            let res: ResultJson = io::parse(&text)?;
            let stage = match a.artifact {
                Artifact::Network => Stage::Rewire,
                Artifact::Aux => Stage::Stage1,
                Artifact::Hat => Stage::Interiors,
                Artifact::Candidates => Stage::Planarize,
            };
            dot_of(&res, stage)?
        }
    };
    write(a.out.as_deref(), &text)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RDNET_LOG", "warn")).init();
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Reconstruct { run: a, stage } => run(a, (*stage).into()),
        Command::Estimate(a) => run(a, Stage::Estimate),
        Command::Stage1(a) => run(a, Stage::Stage1),
        Command::PlaceInteriors(a) => run(a, Stage::Interiors),
        Command::Planarize(a) => run(a, Stage::Planarize),
        Command::Rewire(a) => run(a, Stage::Rewire),
        Command::Gradcheck { n, samples, seed } => gradcheck_random(*n, *samples, *seed).and_then(|rep| {
            print!("{}", rep.table());
            println!("{}", if rep.passed { "PASS" } else { "FAIL" });
            if rep.passed {
                Ok(())
            } else {
                Err(Error::Infeasible("derivative check failed".into()))
            }
        }),
        Command::RsnEnum { rmax } => rsn_enum(*rmax),
        Command::Plot(a) => plot(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = serde_json::json!({
                "error": { "kind": e.kind(), "stage": e.stage(), "message": e.to_string() }
            });
            eprintln!("{msg}");
            ExitCode::from(if e.kind() == "parse" { 2 } else { 1 })
        }
    }
}
