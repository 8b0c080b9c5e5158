use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} did not converge after {iterations} iterations (achieved error {achieved:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        achieved: f64,
    },

    #[error("non-finite integrand value at sample {index}")]
    NonFinite { index: u64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
