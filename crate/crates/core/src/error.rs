//! Crate error type.

use thiserror::Error;

/// Errors produced by the solver, generators, and file formats.
///
/// Indices in messages are 1-based, matching the Matrix Market convention
/// used by the on-disk formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A Cholesky pivot was nonpositive. `index` is the 1-based pivot row.
    #[error("matrix is not SPD: nonpositive pivot at index {index}")]
    NotSpd { index: usize },

    /// A quadratic form or CG direction turned nonpositive mid-iteration.
    #[error("breakdown: {0} (input is not SPD)")]
    Breakdown(String),

    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("dense dimension {n} exceeds cap {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("infeasible targets: {0}")]
    InfeasibleTargets(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("positive coupling entry at index {index}")]
    PositiveCoupling { index: usize },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
