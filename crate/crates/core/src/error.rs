use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid crack: {0}")]
    InvalidCrack(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not aligned with the grid: {0}")]
    NotGridAligned(String),
    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),
    #[error("domain is not simply connected")]
    NotSimplyConnected,
    #[error("input field is not converged (residual {0:e})")]
    Unconverged(f64),
    #[error("expression error: {0}")]
    Expr(String),
    #[error("set is not contained in the container: {0}")]
    NotContained(String),
}

pub type Result<T> = std::result::Result<T, Error>;
