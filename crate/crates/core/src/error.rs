use thiserror::Error;

/// Errors raised by the spectral machinery, the integrator and the
/// experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {x} lies outside [-1, 1]")]
    Domain { x: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mass matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("field belongs to a basis of dimension {found}, expected {expected}")]
    BasisMismatch { expected: usize, found: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("field mean {mean:e} is not zero")]
    NonZeroMean { mean: f64 },

    #[error("fields carry different mass (mean difference {diff:e})")]
    MeanMismatch { diff: f64 },

    #[error("run diverged at step {step} (max |phi| = {max_abs:e})")]
    Diverged { step: usize, max_abs: f64 },

    #[error("snapshot has bad magic bytes")]
    BadMagic,

    #[error("snapshot format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("snapshot payload truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("snapshot has {extra} trailing bytes")]
    TrailingBytes { extra: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
