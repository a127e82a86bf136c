use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no edges")]
    NoEdges,

    #[error("distinct nodes required (q[{0}] == q[{1}])")]
    DistinctNodesRequired(usize, usize),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },

    #[error("matrix is not symmetric (max |m - m^T| = {0:e})")]
    Asymmetric(f64),

    #[error("matrix of order {n} exceeds the eigensolver cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("eigensolver failed to converge")]
    NoConvergence,

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("node {node} out of range (num_nodes = {num_nodes})")]
    NodeOutOfRange { node: usize, num_nodes: usize },

    #[error("label {label} at node {node} out of range (num_classes = {num_classes})")]
    LabelOutOfRange { node: usize, label: usize, num_classes: usize },

    #[error("row-count mismatch: expected {expected} feature rows, found {found}")]
    RowCountMismatch { expected: usize, found: usize },

    #[error("empty mask")]
    EmptyMask,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite loss at epoch {epoch}: ce = {ce}, sr = {sr}")]
    NonFiniteLoss { epoch: usize, ce: f64, sr: f64 },

    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFiniteLoss { .. } | Error::NoConvergence | Error::Asymmetric(_))
    }
}
