//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the wavedge library.
#[derive(Debug, Error)]
pub enum Error {
    /// Underlying I/O failure while reading or writing a raster file.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A file could not be parsed as a supported raster format.
    #[error("unsupported or malformed raster: {0}")]
    Format(String),

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative solver failed to converge; never silently ignored.
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
