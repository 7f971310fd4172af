use thiserror::Error;

/// Errors produced by game construction, expectation and equilibrium routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied an out-of-range index, a malformed shape, or bad parameters.
    #[error("invalid input: {0}")]
    Input(String),
    /// A value fell outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// An enumeration or solver size guard was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// A linear solve or simplex run failed to produce an acceptable answer.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The mixture solver ran out of rounds and could not fall back.
    #[error("no convergence after {rounds} rounds (last certificate gap {last_gap:e})")]
    Convergence { rounds: usize, last_gap: f64 },
    /// A serialized document could not be decoded.
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
