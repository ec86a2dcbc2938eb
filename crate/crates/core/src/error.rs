use thiserror::Error;

/// Failures surfaced by the reconstruction library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("network is disconnected or numerically singular (smallest eigenvalue of L + J/n is {0:e})")]
    SingularNetwork(f64),
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("constraint needs matrix entry ({0}, {1}) which is outside the distance matrix")]
    MissingEntry(usize, usize),
    #[error("need at least 3 boundary nodes, got {0}")]
    TooFewNodes(usize),
    #[error("r_max must be at least 2, got {0}")]
    InvalidRmax(f64),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid measurements: {0}")]
    InvalidMeasurements(String),
    #[error("no feasible point found: {0}")]
    Infeasible(String),
    #[error("oracle returned a non-finite value at the starting point")]
    OracleFailure,
    #[error("graph is disconnected")]
    DisconnectedInput,
    #[error("auxiliary network is disconnected")]
    Disconnected,
    #[error("every planar candidate was rejected")]
    NoCandidate,
    #[error("no feasible candidate result")]
    AllInfeasible,
    #[error("i/o: {0}")]
    Io(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("{stage}: {source}")]
    Stage { stage: String, source: Box<Error> },
}

impl Error {
    /// Stable machine-readable name of the variant (of the innermost error
    /// for stage-tagged ones).
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularNetwork(_) => "singular_network",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::MissingEntry(..) => "missing_entry",
            Error::TooFewNodes(_) => "too_few_nodes",
            Error::InvalidRmax(_) => "invalid_rmax",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidNetwork(_) => "invalid_network",
            Error::InvalidMeasurements(_) => "invalid_measurements",
            Error::Infeasible(_) => "infeasible",
            Error::OracleFailure => "oracle_failure",
            Error::DisconnectedInput => "disconnected_input",
            Error::Disconnected => "disconnected",
            Error::NoCandidate => "no_candidate",
            Error::AllInfeasible => "all_infeasible",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
            Error::Stage { source, .. } => source.kind(),
        }
    }

    /// Stage tag, when present.
    pub fn stage(&self) -> Option<&str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    pub fn at(self, stage: &str) -> Self {
        Error::Stage { stage: stage.to_string(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
