use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex index {index} out of range (graph has {count} vertices)")]
    InvalidVertex { index: usize, count: usize },

    #[error("edge index {index} out of range (graph has {count} edges)")]
    InvalidEdge { index: usize, count: usize },

    #[error("probability vector has {got} entries, graph has {expected} edges")]
    SizeMismatch { expected: usize, got: usize },

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(String),

    #[error("probability vector is not constrained (p_e != p_e' for some edge)")]
    Unconstrained,

    #[error("{what}: size {size} exceeds limit {limit}; use the Monte Carlo estimator (`mc`) or raise the limit")]
    Capacity { what: &'static str, size: usize, limit: usize },

    #[error("invalid triplet ({x},{y},{z}) for n = {n}")]
    InvalidTriplet { n: u32, x: u32, y: u32, z: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed distribution: {0}")]
    MalformedDistribution(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("identity mismatch: {0}")]
    IdentityMismatch(String),
}
