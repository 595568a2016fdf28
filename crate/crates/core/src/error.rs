use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported representation: {0}")]
    UnsupportedRepresentation(&'static str),

    /// `P(X = 1)` must lie strictly inside (0, 1).
    #[error("overlap violation: treatment share {0} is not in (0, 1)")]
    Overlap(f64),

    #[error("curve is not nonincreasing: value {later} at delta {at} exceeds earlier value {earlier}")]
    NotMonotone { at: f64, earlier: f64, later: f64 },

    #[error("inconsistent grids: {0}")]
    InconsistentGrid(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: {msg}")]
    Data { row: usize, msg: String },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
