use thiserror::Error;

/// Errors shared by all library modules.
#[derive(Debug, Error)]
pub enum Error {
    /// The input violates a documented precondition.
    #[error("validation: {0}")]
    Validation(String),
    /// A bounded search exceeded its configured budget.
    #[error("resource budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

pub(crate) fn budget(msg: impl Into<String>) -> Error {
    Error::Budget(msg.into())
}
