use thiserror::Error;

/// Errors shared across the model, allocation and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A provisioning coefficient along a used path is zero, so a
    /// transmission or execution time would be infinite.
    #[error("degenerate allocation: {0}")]
    DegenerateAllocation(String),

    /// The M/M/1 service rate at a node does not exceed the arrival rate.
    #[error("unstable queue at node {node}, slice {slice}")]
    UnstableQueue { node: usize, slice: usize },

    /// A node has zero capability in the requested slice.
    #[error("node {node} has no capability in slice {slice}")]
    InfeasibleSliceNode { node: usize, slice: usize },

    #[error("offloader set is empty")]
    EmptyOffloaderSet,

    #[error("non-positive cost entry at index {0}")]
    NonPositiveCost(usize),

    #[error("oracle dimension {0} exceeds the supported maximum of {1}")]
    DimensionTooLarge(usize, usize),

    #[error("decision space size {size} exceeds the enumeration cap {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u128 },

    #[error("invalid scenario config: {0}")]
    ConfigInvalid(String),

    #[error("need at least 2 samples for a confidence interval, got {0}")]
    TooFewSamples(usize),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
