use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("polynomial is not homogeneous: {0}")]
    NonHomogeneous(String),
    #[error("inexact division: nonzero remainder {0}")]
    InexactDivision(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("linear form {index} vanishes at the data point")]
    Resonance { index: usize },
    #[error("total degree start needs {count} paths, above the cap {cap}; use a multihomogeneous start")]
    PathOverflow { count: u128, cap: u128 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
