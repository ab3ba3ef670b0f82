use thiserror::Error;

/// Every fallible operation in the crate returns this error.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument outside the function's domain: {0}")]
    Domain(String),
    #[error("parameters infeasible: {0}")]
    Infeasible(String),
    #[error("field degree {0} unsupported (supported: 2..=256)")]
    FieldDegreeUnsupported(usize),
    #[error("bit source exhausted after {0} bits")]
    SourceExhausted(u64),
    #[error("input too short: {0}")]
    InputTooShort(String),
    #[error("event stream not sorted at index {0}")]
    UnsortedStream(usize),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("estimation impossible: {0}")]
    Estimation(String),
    #[error("no Bell violation: {0}")]
    NoViolation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
