use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid under-resolved: {0}")]
    UnderResolved(String),
    #[error("block index {q} outside [{lo}, {hi}]")]
    BlockOutOfRange { q: i32, lo: i32, hi: i32 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("missing collision-frequency table for a nu-weighted norm")]
    MissingNu,
    #[error("trajectory error: {0}")]
    Trajectory(String),
    #[error("iteration diverged at n = {n} (t = {t})")]
    Diverged { n: usize, t: f64 },
    #[error("unknown inequality id: {0}")]
    UnknownCheck(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
