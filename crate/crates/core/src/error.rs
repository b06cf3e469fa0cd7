use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rule number {0} is outside 0..=255")]
    RuleOutOfRange(i64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("lattice too narrow: {0}")]
    LatticeTooNarrow(String),

    #[error("no periodic background found: best coverage {best_coverage:.3} is below {required:.2}")]
    NoEther { best_coverage: f64, required: f64 },

    #[error("rule {rule} has no photonic realization at grid resolution {grid_steps} (see `peca census`)")]
    Infeasible { rule: u8, grid_steps: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
