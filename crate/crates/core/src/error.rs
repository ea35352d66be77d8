use thiserror::Error;

/// Failures surfaced by the library. Variants carry enough context to build
/// the CLI's structured error objects.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("vertex {0} is out of range")]
    UnknownVertex(usize),
    #[error("edge id {0} is out of range")]
    UnknownEdge(usize),
    #[error("no edge between {0} and {1}")]
    MissingEdge(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("parallel edge between {0} and {1}")]
    ParallelEdge(usize, usize),
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
    #[error("missing embedding")]
    MissingEmbedding,
    #[error("face id {0} does not exist")]
    UnknownFace(usize),
    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("instance exceeds the configured cap: {0}")]
    CapExceeded(String),
    #[error("invalid CSP instance: {0}")]
    InvalidInstance(String),
    #[error("weights are not symmetric at {0:?}")]
    AsymmetricWeights((usize, usize, usize, usize)),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
