use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the reconstruction library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed row: {msg}")]
    MalformedRow {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: bad file format: {msg}")]
    BadFormat { path: PathBuf, msg: String },

    #[error("trajectory point {index} invalid: ({kx}, {ky}) outside [-0.5, 0.5] or non-finite")]
    InvalidTrajectoryPoint { index: usize, kx: f64, ky: f64 },

    #[error("kernel cache hash mismatch: cache has {cached}, trajectory is {actual}")]
    CacheHashMismatch { cached: String, actual: String },

    #[error("degenerate point set: {0}")]
    DegeneratePoints(String),

    #[error("internal consistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
