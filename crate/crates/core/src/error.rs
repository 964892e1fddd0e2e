use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller passed arguments that violate an operation's preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    /// Input data failed validation; `field` names the offending entry.
    #[error("invalid input at `{field}`: {message}")]
    Invalid { field: String, message: String },

    /// A size guard was exceeded before any heavy computation started.
    #[error("resource guard exceeded: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
