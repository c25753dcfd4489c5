use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested case is outside what the analysis covers (e.g. the
    /// minus branch for photon numbers above two).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A resource guard refused the computation (full-space verification
    /// is capped at small block lengths).
    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
