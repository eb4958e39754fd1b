use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across simulation, estimation and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e} after {intervals} subintervals")]
    QuadratureNonConvergence {
        a: f64,
        b: f64,
        error: f64,
        intervals: usize,
    },

    #[error("Cholesky factorization failed at row {row} even after diagonal jitter {jitter:e}")]
    CholeskyFailure { row: usize, jitter: f64 },

    #[error(
        "u-grid too coarse for phase unwrapping at u = {u}: predicted phase increment {increment} exceeds pi; refine the grid step"
    )]
    GridTooCoarse { u: f64, increment: f64 },

    #[error("degenerate base weight: moment system is singular (determinant {0:e})")]
    DegenerateWeight(f64),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("failed to read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
