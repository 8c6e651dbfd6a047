use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("site index {index} out of range for {n_sites} sites")]
    IndexOutOfRange { index: usize, n_sites: usize },

    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension {dim} exceeds the limit of {limit} states")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
