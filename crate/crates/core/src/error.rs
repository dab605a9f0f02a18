use thiserror::Error;

/// Errors raised by the library.
///
/// Certification failures are kept distinct from plain argument errors so
/// callers (the CLI in particular) can map them to their own exit status.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("budget violated: {used} evaluations used, {allowed} allowed")]
    Budget { used: usize, allowed: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn cert(msg: impl Into<String>) -> Self {
        Error::Certification(msg.into())
    }

    /// True for failures of a numerical self-check (as opposed to bad input).
    pub fn is_certification(&self) -> bool {
        matches!(self, Error::Certification(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
