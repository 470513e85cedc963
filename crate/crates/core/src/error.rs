use thiserror::Error;

/// Errors raised by the geometric routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate first fundamental form at node {node}: {detail}")]
    Discretization { node: usize, detail: String },

    #[error("equidistant foliation breaks down at node {node} (critical distance {critical_rho})")]
    FoliationBreakdown { node: usize, critical_rho: f64 },

    #[error("E + B is singular at node {node}; data at infinity undefined there")]
    TransformSingular { node: usize },

    #[error("E + B* is singular at node {node}; inverse transform undefined")]
    InverseTransform { node: usize },

    #[error("surface leaf is not regular at {} node(s), first {:?}", nodes.len(), nodes.first())]
    Regularity { nodes: Vec<usize> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("line search failed after {0} halvings")]
    LineSearch(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
