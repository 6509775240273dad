//! Error types shared across the library.

use thiserror::Error;

/// Library-wide error type.
///
/// `Config` carries the offending key so the CLI can name it and exit with
/// the configuration-failure status; everything else maps to a runtime
/// failure.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value or unknown key; `key` names the field.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    /// Geometric or numeric domain violation (e.g. zero-length direction).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent internal state; indicates a bug, not bad input.
    #[error("internal consistency error: {0}")]
    Internal(String),

    /// File-system failure while reading inputs or writing results.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Error::Internal(message.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
