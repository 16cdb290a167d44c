//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension {dim} too small: {needed}")]
    DimensionTooSmall { dim: usize, needed: String },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("operator is not Hermitian (max |A - A^dag| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("operator is not a projector (max |E^2 - E| = {defect:.3e})")]
    NotProjector { defect: f64 },

    #[error("operator is not a density matrix: {reason}")]
    NotDensity { reason: String },

    #[error("eigenvalue {value:.6e} outside [{lo:.1e}, {hi:.1e}]")]
    EigenvalueOutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("potential is not confining: {reason}")]
    NotConfining { reason: String },

    #[error("history specification invalid: {reason}")]
    InvalidHistory { reason: String },

    #[error("branch count {count} exceeds limit {limit}")]
    TooManyBranches { count: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value produced in {context}")]
    NonFinite { context: String },
}
