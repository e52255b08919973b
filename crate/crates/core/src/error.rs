use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument, dimension mismatch or violated precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("scenario validation failed: {0}")]
    Validation(String),

    /// The reduced stiffness system could not be factorized or solved.
    #[error("singular system in {stage}: {detail}")]
    Singular { stage: String, detail: String },

    #[error("optimization failed at iteration {iteration} (seed {seed}): {source}")]
    Optimization {
        iteration: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("Lagrange multiplier bisection did not converge, last bracket [{lo:e}, {hi:e}]")]
    Bisection { lo: f64, hi: f64 },

    #[error("corrupt record in {path}: {detail}")]
    Corruption { path: PathBuf, detail: String },

    #[error("index {index} out of range for {count} records")]
    OutOfRange { index: usize, count: usize },

    #[error("dataset generation: {0}")]
    Dataset(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the linear solve, however deeply wrapped.
    pub fn is_singular(&self) -> bool {
        match self {
            Error::Singular { .. } => true,
            Error::Optimization { source, .. } => source.is_singular(),
            _ => false,
        }
    }
}
