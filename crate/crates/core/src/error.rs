//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("n0*d must be even, got n0={n0} d={d}")]
    OddHalfEdges { n0: usize, d: usize },

    #[error("{what} = {value} exceeds cap {cap}")]
    TooLarge {
        what: &'static str,
        value: String,
        cap: String,
    },

    #[error("malformed graph data: {0}")]
    MalformedGraph(String),

    #[error("no certified ensemble after {attempts} attempts")]
    CertificationExhausted { attempts: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
