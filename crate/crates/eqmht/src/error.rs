//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A model or simulation parameter violates one of its invariants.
    /// The message names the failed invariant.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure (factorization, calibration) failed to converge
    /// or produced a non-finite result.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Aggregation over replications had no usable data.
    #[error("aggregation error: {0}")]
    Aggregation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
