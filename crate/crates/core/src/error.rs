use thiserror::Error;

/// Errors raised by the geometry, flow and diagnostics layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh corruption: {0}")]
    MeshCorruption(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("vertex {0} is a junction; use junction_balance")]
    JunctionVertex(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("orientation error: {0}")]
    Orientation(String),

    #[error("topology event aborted: {0}")]
    Topology(String),

    #[error("step failed at t = {t}: {reason}")]
    Step { t: f64, reason: String },

    #[error("malformed grid field: {0}")]
    Grid(String),

    #[error("varifold has no adjacency structure")]
    NoAdjacency,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
