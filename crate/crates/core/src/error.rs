use thiserror::Error;

/// Errors raised by construction, coding and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolarError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input data, e.g. a reliability file.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// Inconsistent decoder or simulation configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller broke the contract of a node decoder.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for PolarError {
    fn from(e: std::io::Error) -> Self {
        PolarError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PolarError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(PolarError::Domain(msg.into()))
}
