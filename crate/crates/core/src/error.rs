use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value outside the sample space: {0}")]
    Domain(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn hypothesis(msg: impl Into<String>) -> Error {
    Error::Hypothesis(msg.into())
}
