use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix of dimension {dim} is not a square of {d}")]
    NotPerfectSquare { dim: usize, d: usize },

    #[error("{what} exceeds the supported size (limit {limit}, requested {requested})")]
    SizeCap {
        what: &'static str,
        limit: usize,
        requested: usize,
    },

    #[error("eigendecomposition did not converge (dim {dim}, residual {residual:e})")]
    NoConvergence { dim: usize, residual: f64 },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("map is not unital and trace preserving (deviation {deviation:e})")]
    NotUnitalTp { deviation: f64 },

    #[error("inconsistent tableau: {0}")]
    InvalidTableau(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("sample budget exceeded: {needed} > cap {cap}")]
    BudgetExceeded { needed: u64, cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
