//! Solver library and Monte Carlo experiment harness for joint
//! offloading-decision and slice resource allocation in an edge network
//! with in-network computing nodes.
//!
//! - [`model`]: domain types and the closed-form time/cost formulas
//! - [`allocation`]: exact continuous inner solver (square-root rule)
//! - [`solver`]: discrete outer solvers (exhaustive, best response)
//! - [`scenario`]: seeded random instance generation with a path-loss
//!   channel model
//! - [`montecarlo`]: gain and offloader-count sweeps with confidence
//!   intervals
//! - [`validate`]: standalone constraint and cost re-validation

pub mod allocation;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod scenario;
pub mod solver;
pub mod validate;

pub use allocation::{AllocationResult, InterSliceMode};
pub use error::{Error, Result};
pub use model::{
    CostBreakdown, Decision, DecisionVector, Policies, StabilityMode, SystemModel,
};
pub use montecarlo::{GainReport, OffloaderReport, SolverMethod};
pub use scenario::{ScenarioConfig, RNG_ALGORITHM_ID};
pub use solver::{Method, Solution};
