use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix dimension {dim} exceeds the capacity of {cap}")]
    Capacity { dim: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("site index {index} out of range for a chain of {n_sites} sites")]
    Index { index: usize, n_sites: usize },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("integration failed at s = {at} after {steps} steps: {reason} (achieved error {achieved:e})")]
    Convergence {
        at: f64,
        steps: usize,
        achieved: f64,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
