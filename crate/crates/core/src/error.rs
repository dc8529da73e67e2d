use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing or unreadable dataset file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("{file}:{line}: edge ({src}, {dst}) joins graph {src_graph} and graph {dst_graph}")]
    CrossGraphEdge {
        file: String,
        line: usize,
        src: usize,
        dst: usize,
        src_graph: usize,
        dst_graph: usize,
    },

    #[error("index {index} out of range for {len} items")]
    Index { index: usize, len: usize },

    #[error("feature policy not applicable: {0}")]
    Policy(String),

    #[error("feature matrix has {dim} column(s); at least 2 are needed for Pearson correlation (concatenate with ldp)")]
    DegenerateFeature { dim: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value at row {row}, column {col}")]
    Numeric { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("empty value set")]
    EmptySet,

    #[error("training labels contain a single class")]
    DegenerateLabels,

    #[error("class {class} has {count} member(s), fewer than the {folds} folds requested")]
    Stratification {
        class: usize,
        count: usize,
        folds: usize,
    },

    #[error("graph {graph}: {source}")]
    InGraph {
        graph: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Format { .. }
            | Error::Parse { .. }
            | Error::CrossGraphEdge { .. }
            | Error::Policy(_)
            | Error::DegenerateFeature { .. }
            | Error::DegenerateLabels
            | Error::Stratification { .. }
            | Error::Io(_) => ErrorKind::Data,
            Error::Numeric { .. } | Error::EmptySet | Error::Dimension(_) => ErrorKind::Numeric,
            Error::Index { .. } | Error::Argument(_) => ErrorKind::Usage,
            Error::InGraph { source, .. } => source.kind(),
        }
    }

    pub(crate) fn in_graph(self, graph: usize) -> Error {
        Error::InGraph {
            graph,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
