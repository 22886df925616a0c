use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty edge list")]
    EmptyEdgeList,

    #[error("need at least {needed} nodes, got {got}")]
    TooFewNodes { needed: usize, got: usize },

    #[error("degenerate feature table: {0}")]
    DegenerateFeatures(String),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("null model fit failed: {0}")]
    NullFit(String),

    #[error("malformed binary graph cache: {0}")]
    BadCache(String),

    #[error("malformed model file: {0}")]
    BadModel(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures caused by numerically degenerate input rather than bad usage.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateFeatures(_) | Error::NullFit(_) | Error::TooFewNodes { .. }
        )
    }
}
