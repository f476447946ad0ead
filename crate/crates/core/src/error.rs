use std::path::PathBuf;

use crate::population::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("network is not a completed spanning tree")]
    IncompleteNetwork,

    #[error("invalid tree structure: {0}")]
    InvalidTree(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("node {0} is a root and has no target energy")]
    RootHasNoTarget(NodeId),

    #[error("network is not a line")]
    NotALine,

    #[error("node sets differ in size ({0} vs {1})")]
    MismatchedNodeSets(usize, usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("replay mismatch: {0}")]
    ReplayMismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
