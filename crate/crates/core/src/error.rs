use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the tracking library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a mathematical precondition (non-PSD matrix,
    /// undefined mean, singular covariance, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The exhaustive association space exceeds the configured cap.
    #[error(
        "association space of {requested} events exceeds the cap of {cap}; \
         use the cluster-pruned or marginal scheme instead"
    )]
    Capacity { requested: f64, cap: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
