use thiserror::Error;

/// Errors surfaced by the library.
///
/// The CLI maps `InvalidInput`-like variants to exit code 1 and numerical or
/// resource failures to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on user-supplied data failed (zero input, degree < 2,
    /// degenerate map, malformed spec, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested point lies outside the domain of the operation
    /// (the excluded origin, a diagonal pair, an exceptional start point).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative numerical procedure failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Exact arithmetic would exceed the configured size limits.
    #[error("resource limit: {0}")]
    Resource(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}
