use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid caching policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status: 2 for bad input, 3 for numeric or internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::InvalidPolicy(_) | Error::Validation { .. } | Error::Io(_) => 2,
            _ => 3,
        }
    }

    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
