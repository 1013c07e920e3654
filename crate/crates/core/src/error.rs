use std::path::PathBuf;

use thiserror::Error;

/// Errors produced across graph construction, simulation and verification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },

    #[error("graph must have at least one vertex")]
    EmptyGraph,

    #[error("product graph would have {requested} vertices, limit is {limit}")]
    SizeLimit { requested: usize, limit: usize },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("self-loop ({0}, {0}) must not be listed; self-loops are implicit")]
    ExplicitSelfLoop(usize),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("probability {value} for {what} is outside [0, 1]")]
    Probability { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("exact independence number unavailable: graph has {vertex_count} vertices, exact limit is {limit}")]
    AlphaUnavailable { vertex_count: usize, limit: usize },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("hypothesis violated at ({row}, {col}): {message}")]
    Hypothesis { row: usize, col: usize, message: String },

    #[error("instance too large to enumerate: {0}")]
    TooLarge(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
