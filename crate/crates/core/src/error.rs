use thiserror::Error;

/// Errors raised by the numerical kernels, the detectors and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation (non-square,
    /// non-Hermitian, negative correlation coefficient, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix too close to singular for the requested operation.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// Inconsistent matrix or scenario dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A detector precondition does not hold; the message names the violated condition.
    #[error("detector infeasible: {0}")]
    Infeasible(String),

    /// Detector invoked without data it needs (e.g. a known-subspace detector without a basis).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::Dimension(_) | Error::Domain(_) => 2,
            Error::Infeasible(_) | Error::Conditioning(_) => 3,
            Error::Io(_) => 4,
        }
    }
}
