//! Error type shared across the crate.

/// Errors produced by builders, analytics, and experiment drivers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested computation is only supported below a size cap
    /// (exhaustive subset sweeps, dense linear algebra, brute-force state
    /// enumeration).
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    /// A numeric routine failed to reach its accuracy target (iteration did
    /// not converge, residual above tolerance, ill-conditioned solve).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Malformed input data (geometry files, configuration files).
    #[error("malformed input: {0}")]
    Malformed(String),

    /// Underlying I/O failure while reading or writing artifacts.
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::UnsupportedSize(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }
}
