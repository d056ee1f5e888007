use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("size overflow: {0}")]
    Size(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("collective protocol error: {0}")]
    Protocol(String),

    #[error("deadlock: {0}")]
    Deadlock(String),

    /// Returned to ranks that were blocked when another rank failed.
    #[error("rank aborted because rank {origin} failed")]
    Aborted { origin: usize },

    #[error("no source vertex found after {draws} draws (largest component too small)")]
    ComponentTooSmall { draws: usize },

    #[error("report error: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
