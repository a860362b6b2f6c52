use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text (group, oracle or pipeline files, words).
    #[error("parse error: {0}")]
    Parse(String),

    /// Caller mixed incompatible objects, e.g. elements of different backends.
    #[error("usage error: {0}")]
    Usage(String),

    /// A declared radius, window or step budget would be exceeded.
    #[error("resource limit: {0}")]
    Resource(String),

    /// The operation is not available on this backend.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Too little data to produce a meaningful estimate.
    #[error("diagnostic: {0}")]
    Diagnostic(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn diagnostic(msg: impl Into<String>) -> Self {
        Error::Diagnostic(msg.into())
    }
}
