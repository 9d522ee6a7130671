use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("singular frequency: spectral density is unbounded at omega = {omega}")]
    SingularFrequency { omega: f64 },

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("spec file: {0}")]
    SpecFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
