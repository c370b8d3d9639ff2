use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

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

    #[error("edge probability {value} > 1 for pair ({i}, {j}); the Chung-Lu model needs w_i w_j p <= 1")]
    ProbabilityExceedsOne { i: usize, j: usize, value: f64 },

    #[error("{what}: n = {n} exceeds the limit of {limit}{hint}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
        hint: &'static str,
    },

    #[error("size mismatch: graph has {graph} vertices, weight vector has {weights}")]
    SizeMismatch { graph: usize, weights: usize },

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("replication failed (f = {f}, rep = {rep}, seed = {seed}): {message}")]
    Replication {
        f: f64,
        rep: usize,
        seed: u64,
        message: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
