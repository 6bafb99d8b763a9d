//! Crate-wide error type.

use std::fmt;

/// Errors produced by model construction, solvers and data loading.
#[derive(Debug)]
pub enum Error {
    /// A parameter or input failed validation.
    InvalidInput { name: &'static str, reason: String },
    /// Input data is degenerate for the requested operation
    /// (e.g. constant data for a quantile mask, rank-deficient SVD input).
    DegenerateData(String),
    /// The optimization objective became non-finite.
    NonFiniteObjective { iteration: usize },
    /// File or CSV handling failed.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput { name, reason } => write!(f, "invalid `{name}`: {reason}"),
            Error::DegenerateData(msg) => write!(f, "degenerate data: {msg}"),
            Error::NonFiniteObjective { iteration } => {
                write!(f, "objective became non-finite at iteration {iteration}")
            }
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
