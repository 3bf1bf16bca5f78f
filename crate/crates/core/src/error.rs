use thiserror::Error;

use crate::netmodel::NodeId;

/// Errors produced by topology construction, lookups, and input parsing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),

    #[error("parse error: {0}")]
    Parse(String),

    /// Parse failure in a line-delimited input, naming the offending line.
    #[error("parse error at line {line}: {message}")]
    ParseLine { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn parse(msg: impl std::fmt::Display) -> Self {
        Error::Parse(msg.to_string())
    }
}
