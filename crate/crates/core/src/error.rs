use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit reports. `kind()` is the stable machine-readable tag
/// the CLI prints on failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed template `{template}`: {reason}")]
    MalformedTemplate { template: String, reason: String },

    #[error("descriptor `{descriptor}` belongs to the {found} axis but was placed in the {slot} slot")]
    AxisMismatch {
        descriptor: String,
        slot: &'static str,
        found: &'static str,
    },

    #[error("malformed semantic configuration: {0}")]
    MalformedConfig(String),

    #[error("count mismatch for {what}: declared {declared}, found {found}")]
    ConfigCountMismatch {
        what: String,
        declared: usize,
        found: usize,
    },

    #[error("invalid configuration file: {0}")]
    InvalidConfigFile(String),

    #[error("axis {axis} has {available} descriptors, need at least {required}")]
    InsufficientDescriptors {
        axis: &'static str,
        available: usize,
        required: usize,
    },

    #[error("no Stage 1 statistics for descriptor `{0}`")]
    MissingDescriptorStats(String),

    #[error("duplicate sample {sample_index} for condition `{condition_id}`")]
    DuplicateSample {
        condition_id: String,
        sample_index: u64,
    },

    #[error("schema violation at line {line}: {reason}")]
    SchemaViolation { line: usize, reason: String },

    #[error("unknown condition `{0}`")]
    UnknownCondition(String),

    #[error("probability {p_hat} is saturated and no continuity correction was requested")]
    SaturatedProbability { p_hat: f64 },

    #[error("condition `{condition_id}` has {n} samples, need at least {required}")]
    InsufficientSamples {
        condition_id: String,
        n: usize,
        required: usize,
    },

    #[error("permutation test needs at least {minimum} iterations, got {requested}")]
    TooFewIterations { requested: usize, minimum: usize },

    #[error("vector dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("zero vector (norm {norm:e})")]
    ZeroVector { norm: f64 },

    #[error("empty anchor set: {0}")]
    EmptyAnchorSet(&'static str),

    #[error("degenerate variance: all {n} values are equal")]
    DegenerateVariance { n: usize },

    #[error("need at least 2 values for an effect size, got {0}")]
    TooFewValues(usize),

    #[error("anchor word `{0}` has no embedding")]
    MissingAnchor(String),

    #[error("embedding file `{0}` contains no trait rows")]
    EmptyEmbeddingFile(String),

    #[error("ledger is missing {} condition(s): {}", .0.len(), .0.join(", "))]
    IncompleteLedger(Vec<String>),

    #[error("Stage 1 conditions missing from ledger: {}", .0.join(", "))]
    MissingStage1(Vec<String>),

    #[error("path does not exist: {0}")]
    MissingPath(String),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedTemplate { .. } => "MalformedTemplate",
            Error::AxisMismatch { .. } => "AxisMismatch",
            Error::MalformedConfig(_) => "MalformedConfig",
            Error::ConfigCountMismatch { .. } => "ConfigCountMismatch",
            Error::InvalidConfigFile(_) => "InvalidConfigFile",
            Error::InsufficientDescriptors { .. } => "InsufficientDescriptors",
            Error::MissingDescriptorStats(_) => "MissingDescriptorStats",
            Error::DuplicateSample { .. } => "DuplicateSample",
            Error::SchemaViolation { .. } => "SchemaViolation",
            Error::UnknownCondition(_) => "UnknownCondition",
            Error::SaturatedProbability { .. } => "SaturatedProbability",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::TooFewIterations { .. } => "TooFewIterations",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::ZeroVector { .. } => "ZeroVector",
            Error::EmptyAnchorSet(_) => "EmptyAnchorSet",
            Error::DegenerateVariance { .. } => "DegenerateVariance",
            Error::TooFewValues(_) => "TooFewValues",
            Error::MissingAnchor(_) => "MissingAnchor",
            Error::EmptyEmbeddingFile(_) => "EmptyEmbeddingFile",
            Error::IncompleteLedger(_) => "IncompleteLedger",
            Error::MissingStage1(_) => "MissingStage1",
            Error::MissingPath(_) => "MissingPath",
            Error::InvalidManifest(_) => "InvalidManifest",
            Error::Io { .. } => "Io",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
