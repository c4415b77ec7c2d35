use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("zero variance")]
    ZeroVariance,
    #[error("lag out of range")]
    LagOutOfRange,
    #[error("insufficient length: need at least {needed} observations, got {got}")]
    InsufficientLength { needed: usize, got: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("copula correlation out of range")]
    CopulaOutOfRange,
    #[error("degenerate star: need at least 3 nodes, got {0}")]
    DegenerateStar(usize),
    #[error("Yule–Walker system singular")]
    SingularYuleWalker,
    #[error("degenerate likelihood")]
    DegenerateLikelihood,
    #[error("degenerate series")]
    DegenerateSeries,
    #[error("optimizer failed to converge: {0}")]
    Convergence(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
