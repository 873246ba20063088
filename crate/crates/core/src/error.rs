use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GltError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing dataset file {0}")]
    MissingFile(PathBuf),
    #[error("{file}:{line}: {message}")]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{file}:{line}: node index {node} out of range (N={num_nodes})")]
    NodeOutOfRange {
        file: PathBuf,
        line: usize,
        node: usize,
        num_nodes: usize,
    },
    #[error("{location}: duplicate edge ({i},{j})")]
    DuplicateEdge {
        location: String,
        i: usize,
        j: usize,
    },
    #[error("{location}: self-loop on node {node}")]
    SelfLoop { location: String, node: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("edge ({0},{1}) is not in the graph")]
    EdgeNotFound(usize, usize),
    #[error("2-hop edge degree undefined: node {0} is isolated")]
    UndefinedDegree(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty mask: {0}")]
    EmptyMask(&'static str),
    #[error("stale forward trace: {0}")]
    StaleTrace(&'static str),
    #[error(
        "graph has {nodes} nodes, over the dense eigensolve budget of {budget}; use sampled delta mode on a smaller graph or raise the budget"
    )]
    SpectralBudget { nodes: usize, budget: usize },
    #[error("eigensolver did not converge for eigenvalue {0}")]
    NoConvergence(usize),
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
}

impl GltError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GltError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        GltError::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, GltError>;
