//! Error taxonomy shared by every module.
//!
//! Three failure classes matter to callers: a caller handed us invalid
//! inputs (`Domain`), a caller asked an operation of a type that cannot
//! provide it (`Unsupported`), or an operation would exceed a configured
//! resource cap (`Resource`). The CLI maps these onto distinct exit codes.

use thiserror::Error;

/// Errors produced by bound evaluation, estimation, and simulation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Inputs violate a precondition (out of range, wrong shape, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for the given type or configuration.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A configured resource cap (candidate count, enumeration size) would
    /// be exceeded.
    #[error("resource cap exceeded: {0}")]
    Resource(String),

    /// An experiment configuration failed validation.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
