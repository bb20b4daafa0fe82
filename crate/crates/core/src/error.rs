use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("invalid input: {0}")]
    Domain(String),

    /// The requested statistic needs more data than the slice contains.
    /// Never silently truncated; the caller must enumerate further.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A configured memory or work budget would be exceeded.
    #[error("resource budget exceeded: {0}")]
    Budget(String),

    /// Malformed spectrum cache file.
    #[error("cache format: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
