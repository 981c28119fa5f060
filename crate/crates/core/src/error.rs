use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid module data: {0}")]
    InvalidSpec(String),
    #[error("exponent denominator mismatch: {0}")]
    Denominator(String),
    #[error("integer overflow in exponent arithmetic")]
    Overflow,
    #[error("charge bound required: {0}")]
    ChargeBoundRequired(String),
    #[error("mode outside the legal coset: {0}")]
    IllegalCoset(String),
    #[error("rewriting exceeded the step budget of {0}")]
    Divergence(u64),
    #[error("{0}")]
    Json(String),
    #[error("{0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
