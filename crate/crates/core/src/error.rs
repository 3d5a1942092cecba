use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {index} = {value} is outside [0, 1]")]
    CoordinateOutOfRange { index: usize, value: f64 },

    #[error("dimension {0} exceeds the supported maximum of {max}", max = crate::MAX_DIM)]
    DimensionTooLarge(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("invalid orthant table: {0}")]
    InvalidTable(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("cannot parse model `{input}`: {reason}")]
    ModelSyntax { input: String, reason: String },

    #[error("line {row}, column `{column}`: {reason}")]
    Cell {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("{0}")]
    Csv(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
