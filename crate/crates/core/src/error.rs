use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: need {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("non-uniform sampling at index {index}: interval {interval} s, expected {expected} s")]
    NonUniformSampling { index: usize, interval: f64, expected: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {what}{}", layer.map(|l| format!(" (layer {l})")).unwrap_or_default())]
    NonFinite { what: &'static str, layer: Option<usize> },

    #[error("no recorded forward computation to differentiate")]
    NoGraph,

    #[error("model does not provide time derivatives")]
    NoTangent,

    #[error("degenerate range: {0}")]
    DegenerateRange(String),

    #[error("{}:{line}: {message}", path.display())]
    Csv { path: PathBuf, line: u64, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numbers themselves rather than by the
    /// shape or origin of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. } | Error::DegenerateRange(_))
    }
}
