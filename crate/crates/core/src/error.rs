//! Error type shared by every module in this crate.

/// Crate-wide error type.
///
/// Variants map onto the failure classes surfaced by the command-line
/// harness: invalid arguments and malformed configuration, malformed or
/// inconsistent data, and numeric-domain failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input data is structurally invalid (self-loops, bad sizes, corrupt files).
    #[error("data error: {0}")]
    Data(String),

    /// A text input failed to parse; `line` is 1-based.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// A numeric-domain failure (pole on the spectrum, zero gap, non-convergence).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Too few samples to carry out the requested estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
