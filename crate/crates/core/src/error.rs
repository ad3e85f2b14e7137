use thiserror::Error;

use crate::incidence::VertexRef;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: invalid vertex, wrong kind, non-subgroup, ...
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An operation was called outside the set where it is defined.
    #[error("outside domain: {0}")]
    Domain(String),

    /// The geometry violates a property the operation relies on.
    #[error("integrity violation: {message}")]
    Integrity {
        message: String,
        witnesses: Vec<Vec<VertexRef>>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An enumeration exceeded its cap; `reached` is a lower bound on the true size.
    #[error("resource limit exceeded: {what} (cap {cap}, reached at least {reached})")]
    Resource {
        what: String,
        cap: usize,
        reached: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn integrity(message: impl Into<String>, witnesses: Vec<Vec<VertexRef>>) -> Self {
        Error::Integrity {
            message: message.into(),
            witnesses,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
