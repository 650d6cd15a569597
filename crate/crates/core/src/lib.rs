//! Matched-budget benchmarking and workflow evaluation toolkit.
//!
//! Three concerns, kept separate:
//!
//! - **Readiness**: a weighted evidence checklist plus a calibration-drift
//!   bonus maps to an integer readiness level 1–9 ([`metrics`]).
//! - **Utility**: two solvers run on the same instances under identical
//!   resource budgets; the normalized speedup at a target quality compares
//!   their time-to-threshold ([`metrics`], [`harness`], [`stats`]).
//! - **Bottlenecks**: per-stage timing shares across replicates rank where
//!   wall-clock time concentrates ([`audit`]).
//!
//! The [`solvers`] module bundles a synthetic QUBO testbed (simulated
//! annealing vs. a greedy heuristic plus a brute-force oracle) used by the
//! benchmark demo. [`cli`] wires everything into the `qrlbench` binary and
//! emits the governance artifacts (audit trail, preregistration note).

pub mod audit;
pub mod cli;
pub mod harness;
pub mod metrics;
pub mod persist;
pub mod solvers;
pub mod stats;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("drift must be nonnegative, got {0} ppm")]
    NegativeDrift(f64),

    #[error("checklist has {items} items but {weights} weights")]
    ChecklistWeightMismatch { items: usize, weights: usize },

    #[error("weight for checklist item '{item}' is negative ({weight})")]
    NegativeWeight { item: String, weight: f64 },

    #[error("target quality tau must lie in [0, 1], got {0}")]
    TauOutOfRange(f64),

    #[error("quality must lie in [0, 1], got {0}")]
    QualityOutOfRange(f64),

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("stage '{stage}' given negative duration {seconds} s")]
    NegativeDuration { stage: String, seconds: f64 },

    #[error("audit requires at least one stage trace")]
    EmptyTraces,

    #[error("density must lie in (0, 1], got {0}")]
    DensityOutOfRange(f64),

    #[error("bit vector has {got} bits but instance has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("bit vectors may only contain 0 or 1, got {0}")]
    InvalidBit(u8),

    #[error("brute force enumeration is capped at n = {max}, got n = {n}")]
    InstanceTooLarge { n: usize, max: usize },

    #[error("budget rejected: {0}")]
    InvalidBudget(String),

    #[error("manifest rejected: {0}")]
    InvalidManifest(String),

    #[error("solver '{0}' is not registered")]
    UnknownSolver(String),

    #[error("solver '{0}' is already registered")]
    DuplicateSolver(String),

    #[error("{0} must not be empty")]
    EmptyInput(&'static str),

    #[error("instance {instance_id} has no record for solver '{solver}'")]
    UnpairedInstance { instance_id: u64, solver: String },

    #[error("alpha must lie in (0, 1], got {0}")]
    AlphaOutOfRange(f64),

    #[error("bootstrap resample count must be at least 1")]
    ZeroBootstrapCount,

    #[error("{0}")]
    Validation(String),

    #[error("failed to read or write '{path}': {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse '{path}': {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
