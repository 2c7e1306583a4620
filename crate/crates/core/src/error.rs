use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The operation is undefined for the given input (e.g. an empty graph).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured size guard would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A Monte Carlo search could not produce an estimate.
    #[error("estimation failed: {message}")]
    Estimation { message: String, diagnostics: Vec<String> },

    #[error("usage: {0}")]
    Usage(String),

    /// Help or version text was requested; not a failure.
    #[error("{0}")]
    Help(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
