use thiserror::Error;

use crate::tree::{NodeId, TaskStatus};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} not found")]
    NotFound(String),

    #[error("node {id} is {status} and cannot be modified")]
    IllegalState { id: NodeId, status: TaskStatus },

    #[error("illegal status transition {from} -> {to}")]
    IllegalTransition { from: TaskStatus, to: TaskStatus },

    #[error("illegal merge: {0}")]
    IllegalMerge(String),

    #[error("illegal rollback: node {0} is not on the active path")]
    IllegalRollback(NodeId),

    #[error("duplicate link {from} -> {to} ({kind})")]
    DuplicateLink {
        from: NodeId,
        to: NodeId,
        kind: String,
    },

    /// A document failed to parse or validate. `path` points at the
    /// offending field, e.g. `nodes.3.parent`.
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("round {round}: {source}")]
    Session { round: usize, source: Box<Error> },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn node_not_found(id: NodeId) -> Self {
        Error::NotFound(format!("node {id}"))
    }

    /// True for errors caused by a malformed input document rather than
    /// by a bad operation on a valid one.
    pub fn is_schema(&self) -> bool {
        match self {
            Error::Schema { .. } => true,
            Error::Session { source, .. } => source.is_schema(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
