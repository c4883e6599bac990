use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch at {location}: {detail}")]
    DimensionMismatch { location: String, detail: String },

    #[error("anticommutation fails at degree {degree} for generators ({j}, {k})")]
    Anticommutation { degree: i64, j: usize, k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("complex invariant violated: {0}")]
    NotAComplex(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("certificate check failed: {0}")]
    Certificate(String),

    #[error("parse error at {pointer}: {message}")]
    Parse { pointer: String, message: String },

    #[error("{0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}
