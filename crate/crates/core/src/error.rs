use thiserror::Error;

/// Errors produced by the capacity, spectrum and synthesis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the documented validity envelope.
    #[error("argument out of range: {0}")]
    Range(String),

    /// A physical or structural parameter failed validation.
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    /// The dense symmetric eigen-solver did not converge.
    #[error("eigen-solve did not converge ({context})")]
    EigenSolve { context: String },

    /// Matrix or vector shapes are incompatible.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }
}
