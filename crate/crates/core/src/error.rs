use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty column {0}")]
    EmptyColumn(String),

    #[error("duplicate column id {0}")]
    DuplicateId(String),

    #[error("cannot sample {requested} columns from a corpus of {available}")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("corpus needs at least {needed} columns, found {found}")]
    CorpusTooSmall { needed: usize, found: usize },

    #[error("embedding file {0} is empty")]
    EmptyEmbeddingFile(PathBuf),

    #[error("{path}:{line}: expected dimension {expected}, found {found}")]
    Dimension {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("centroid {0:?} has no embedding")]
    OovCentroid(String),

    #[error("centroid pool has {available} values, {requested} requested")]
    PoolTooSmall { requested: usize, available: usize },

    #[error("score {score} for {value:?} is outside [0, 1]")]
    ScoreOutOfRange { value: String, score: f64 },

    #[error("unknown domain function {0}")]
    UnknownFunction(String),

    #[error("unknown embedding space {0}")]
    UnknownSpace(String),

    #[error("unknown validator {0}")]
    UnknownValidator(String),

    #[error("invalid pattern {0:?}")]
    InvalidPattern(String),

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("simplex did not converge within {0} iterations")]
    SolverIterationLimit(usize),

    #[error("linear program is unbounded")]
    UnboundedLp,

    #[error("brute force is limited to {limit} candidates, got {found}")]
    InstanceTooLarge { limit: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure stems from the input data rather than from usage
    /// or an internal fault. The CLI maps this to its exit codes.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            Error::Config(_) | Error::SolverIterationLimit(_) | Error::UnboundedLp | Error::InstanceTooLarge { .. }
        )
    }
}
