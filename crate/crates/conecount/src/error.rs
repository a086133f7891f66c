//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("wrong signature: {pos} positive, {neg} negative, {zero} zero eigenvalues (need (n+1, 1))")]
    Signature { pos: usize, neg: usize, zero: usize },

    #[error("symmetric eigensolver did not converge")]
    Eigen,

    #[error("matrix is not positive definite (leading minor {0} is not positive)")]
    NotPositiveDefinite(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point is not on the positive light cone: {0}")]
    OffCone(String),

    #[error("rejection sampler exceeded its budget of {0} tries")]
    RejectionBudget(usize),

    #[error("insufficient points: {0}")]
    InsufficientPoints(String),

    #[error("definiteness gate: {0}")]
    Definiteness(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
