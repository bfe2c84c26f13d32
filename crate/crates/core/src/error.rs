//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by construction and analysis routines.
///
/// Numerical routines return `Err` for contract violations (dimension
/// mismatches, invalid physical parameters, structurally unusable inputs) and
/// for LAPACK failures; they never panic on user input.
#[derive(Debug, Error)]
pub enum AqecError {
    /// Operator/state dimensions or bases do not match.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A site index is out of range or repeated.
    #[error("invalid site specification: {0}")]
    InvalidSite(String),

    /// A physical parameter is out of its allowed domain (e.g. negative rate).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An input matrix violates a required structural property.
    #[error("structure violation: {0}")]
    Structure(String),

    /// An unknown basis-state label was supplied.
    #[error("unknown state label: {0}")]
    UnknownLabel(String),

    /// The bath-register budget of the jump expansion would be exceeded.
    #[error("register budget exceeded: {0}")]
    RegisterBudget(String),

    /// A dense linear-algebra backend call failed.
    #[error("linear algebra backend error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    /// Failed to parse or validate a model configuration.
    #[error("config error: {0}")]
    Config(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, AqecError>;
