use thiserror::Error;

use crate::complex::{Simplex, VertexId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed simplex {0:?}: repeated vertex")]
    MalformedSimplex(Vec<u32>),

    #[error("vertex {0} is not in the complex")]
    VertexNotFound(VertexId),

    #[error("simplex {0} is not in the complex")]
    SimplexNotFound(Simplex),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("simplex count {count} exceeds the cap of {cap}")]
    SimplexCap { count: u128, cap: usize },

    #[error("point count {count} exceeds the cap of {cap}")]
    PointCap { count: u64, cap: u64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by resource limits rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::SimplexCap { .. } | Error::PointCap { .. })
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}
