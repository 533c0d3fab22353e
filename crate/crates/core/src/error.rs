//! Error classes shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a mathematical precondition (singular curve, zero divisor, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Request exceeds a configured resource cap (field size, search bound, ...).
    #[error("resource error: {0}")]
    Resource(String),

    /// A numeric routine failed to certify its result.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed external data (curve JSON, number-field CSV, polynomial text).
    #[error("ingestion error: {0}")]
    Ingestion(String),

    /// The curve has constant j-invariant and is outside the supported class.
    #[error("isotrivial curve rejected: {0}")]
    Isotrivial(String),

    /// An internal consistency check failed; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn ingestion(msg: impl Into<String>) -> Self {
        Error::Ingestion(msg.into())
    }
    pub fn isotrivial(msg: impl Into<String>) -> Self {
        Error::Isotrivial(msg.into())
    }
    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
