use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    /// A subgradient-projection step needs a nonzero subgradient whenever the
    /// function value is positive.
    #[error("zero subgradient at a point with positive function value")]
    ZeroSubgradient,

    /// Raised by operations that are undefined when the weighted operator
    /// already fixes the point (the displacement norm is below the fixed-point
    /// threshold); callers should treat the point as solved for this block.
    #[error("at fixed point: the weighted displacement vanishes")]
    AtFixedPoint,

    #[error("weight table exhausted at iteration {0}")]
    ScheduleExhausted(usize),

    #[error("relaxation {lambda} outside admissible interval [{lo}, {hi}]")]
    LambdaOutOfRange { lambda: f64, lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("problem validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
