use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("value out of representable range: {0}")]
    Range(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("index {index} outside window [{lo}, {hi}]")]
    Index { index: i64, lo: i64, hi: i64 },
    #[error("evaluation point {x} lies within the exclusion radius of atom {atom} at {position}")]
    Pole { x: f64, atom: usize, position: f64 },
    #[error("region error: {0}")]
    Region(String),
    #[error("numeric branch inconsistency: {0}")]
    NumericBranch(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
