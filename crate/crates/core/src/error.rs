use thiserror::Error;

/// Errors raised by the spectral machinery and everything built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid {grid:?} is too small for mode box {modes:?} (need at least 2n+1 points per axis)")]
    GridTooSmall { grid: [usize; 3], modes: [usize; 3] },

    #[error("fields live on different tori")]
    TorusMismatch,

    #[error("field is not divergence free (max relative divergence {0:.3e})")]
    NotDivergenceFree(f64),

    #[error("field is not planar: {0}")]
    NotPlanar(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
