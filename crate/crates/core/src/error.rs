use thiserror::Error;

/// Errors raised by jet arithmetic, tensor algebra and the operator harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("derivative budget exhausted")]
    BudgetExhausted,

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("not generic: {0}")]
    NotGeneric(String),

    #[error("classification mismatch: {0}")]
    Classification(String),

    #[error("unknown chart `{0}`")]
    UnknownChart(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>) -> Error {
    Error::Numeric(msg.into())
}
