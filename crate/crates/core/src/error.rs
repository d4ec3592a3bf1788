use alloc::string::String;

/// Errors raised by graph construction, validation and the algorithms.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
    #[error("graph has {got} observed nodes; the limit is {limit}")]
    TooManyNodes { got: usize, limit: usize },
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("evaluation error: {0}")]
    Eval(String),
}

pub type Result<T> = core::result::Result<T, Error>;
