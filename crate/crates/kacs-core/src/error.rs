use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("index error: {0}")]
    Index(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("precision overflow: d = {0} exceeds the 52-bit cap")]
    PrecisionOverflow(u32),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate scale: {0}")]
    DegenerateScale(String),

    #[error("feasibility: {0}")]
    Feasibility(String),

    #[error("key error: {0}")]
    Key(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
