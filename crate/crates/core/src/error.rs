use thiserror::Error;

/// Errors raised across ingestion, scoring and search.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate cell ({obs}, {var}, {ctx}) at row {row}")]
    DuplicateCell {
        obs: String,
        var: String,
        ctx: String,
        row: usize,
    },
    #[error("tensor is incomplete: {missing} of {expected} cells missing")]
    IncompleteTensor { missing: usize, expected: usize },
    #[error("row {row}: {message}")]
    ParseError { row: usize, message: String },
    #[error("label mismatch: {0}")]
    LabelMismatch(String),
    #[error("invalid PAA target {target} for series of length {length}")]
    InvalidTarget { target: usize, length: usize },
    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),
    #[error("dataset has no labels attached")]
    MissingLabels,
    #[error("tricluster has an empty dimension")]
    EmptyTricluster,
    #[error("invalid tricluster: {0}")]
    InvalidTricluster(String),
    #[error("profile has fewer than two points")]
    DegenerateProfile,
    #[error("support {support} exceeds sample size {n}")]
    InvalidSupport { support: usize, n: usize },
    #[error("rule is undefined: {0}")]
    UndefinedRule(String),
    #[error("invalid score: {0}")]
    InvalidScore(String),
    #[error("threshold recalibration is not used with the original objective")]
    NoRecalibrationNeeded,
    #[error("dataset {dims:?} is smaller than the minimum tricluster {min_dims:?}")]
    DatasetTooSmall {
        dims: [usize; 3],
        min_dims: [usize; 3],
    },
    #[error("need at least two profiles, got {0}")]
    NotEnoughProfiles(usize),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("solution is empty")]
    EmptySolution,
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable variant name used in single-line diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DuplicateCell { .. } => "DuplicateCell",
            Error::IncompleteTensor { .. } => "IncompleteTensor",
            Error::ParseError { .. } => "ParseError",
            Error::LabelMismatch(_) => "LabelMismatch",
            Error::InvalidTarget { .. } => "InvalidTarget",
            Error::UnknownOutcome(_) => "UnknownOutcome",
            Error::MissingLabels => "MissingLabels",
            Error::EmptyTricluster => "EmptyTricluster",
            Error::InvalidTricluster(_) => "InvalidTricluster",
            Error::DegenerateProfile => "DegenerateProfile",
            Error::InvalidSupport { .. } => "InvalidSupport",
            Error::UndefinedRule(_) => "UndefinedRule",
            Error::InvalidScore(_) => "InvalidScore",
            Error::NoRecalibrationNeeded => "NoRecalibrationNeeded",
            Error::DatasetTooSmall { .. } => "DatasetTooSmall",
            Error::NotEnoughProfiles(_) => "NotEnoughProfiles",
            Error::DegenerateSample(_) => "DegenerateSample",
            Error::EmptySolution => "EmptySolution",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
