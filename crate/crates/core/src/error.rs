use thiserror::Error;

/// Error kinds shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of an operation (point outside a mesh, bad cut, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A definition refers to something that does not exist or is malformed.
    #[error("definition error: {0}")]
    Definition(String),
    /// An operation was invoked in a state where its precondition does not hold.
    #[error("precondition error: {0}")]
    Precondition(String),
    /// A model, system or run configuration is invalid.
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
