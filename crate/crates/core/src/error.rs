use thiserror::Error;

/// Errors raised by the algebraic operations and the file loaders.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("name `{0}` is used both as a vertex and as an edge")]
    AmbiguousName(String),
    #[error("vertex sets differ: {0}")]
    VertexSetMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("graph mismatch: {0}")]
    GraphMismatch(String),
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("graph has a sink at vertex `{0}`")]
    SinkPresent(String),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("map does not respect the bimodule blocks: {0}")]
    NotBlockStructured(String),
    #[error("map is not invertible")]
    NotInvertible,
    #[error("witness rejected: {0}")]
    InvalidWitness(String),
    #[error("conjugacy pair rejected: {0}")]
    InvalidPair(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
