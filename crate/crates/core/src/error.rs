use std::path::PathBuf;

/// Errors produced anywhere in the clustering / calibration pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("cluster {cluster} is degenerate (total weight {weight:e})")]
    DegenerateCluster { cluster: usize, weight: f64 },

    #[error("non-finite value while computing {0}")]
    Numeric(&'static str),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("cannot ingest {path}: {reason}")]
    Ingestion { path: PathBuf, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: u64, reason: String },

    #[error("output error: {0}")]
    Output(String),

    #[error("schema error at `{path}`: {reason}")]
    Schema { path: String, reason: String },

    #[error("incompatible document version {found} (expected {expected})")]
    IncompatibleVersion { found: u64, expected: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
