use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point of norm {norm} lies outside the open unit ball")]
    OutsideBall { norm: f64 },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("trajectory left the closed unit ball at t = {t} (norm {norm})")]
    Escape { t: f64, norm: f64 },

    #[error("series truncation failed: {0}")]
    Truncation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
