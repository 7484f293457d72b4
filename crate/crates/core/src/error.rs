use thiserror::Error;

/// Every failure the library can report.
///
/// The CLI maps each variant onto a fixed process exit status, see
/// [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A computation would exceed the configured memory budget, or I/O failed.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A cache file failed validation.
    #[error("cache integrity: {0}")]
    Integrity(String),

    /// Interval brackets are too wide for the requested quantity; a larger
    /// digit depth is needed.
    #[error("insufficient precision: {0}")]
    Precision(String),

    /// An invariant that holds for valid inputs was violated.
    #[error("internal consistency: {0}")]
    Internal(String),
}

impl Error {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit status used by the `bernconv` binary.
    ///
    /// `3` is reserved for a refuted convexity verdict and never produced here.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter { .. } | Error::Precision(_) => 1,
            Error::Resource(_) | Error::Integrity(_) => 2,
            Error::Internal(_) => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Resource(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
