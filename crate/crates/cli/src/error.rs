use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing input {path}: {reason}")]
    Missing { path: PathBuf, reason: String },

    #[error("{0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Core(#[from] spatembed::Error),
}

impl PipelineError {
    pub fn missing(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        PipelineError::Missing {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        PipelineError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2: missing input or upstream artifact, 3: parse error, 4: numerical degeneracy.
    pub fn exit_code(&self) -> i32 {
        use spatembed::Error as E;
        match self {
            PipelineError::Missing { .. } => 2,
            PipelineError::Usage(_) | PipelineError::Io { .. } => 1,
            PipelineError::Core(e) => match e {
                E::Parse { .. } | E::BadCache(_) | E::BadModel(_) => 3,
                E::DegenerateFeatures(_)
                | E::NullFit(_)
                | E::TooFewNodes { .. }
                | E::TooFewPoints { .. }
                | E::EmptyEdgeList => 4,
                E::Io(_) | E::InvalidParameter(_) => 1,
            },
        }
    }
}
