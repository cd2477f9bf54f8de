//! Deterministic approximate counting of independent sets and proper
//! colorings on graphs of large girth via correlation decay on trees.
//!
//! Shared types are re-exported at the crate root.

pub mod analytic;
pub mod counter;
pub mod graph;
pub mod oracle;
pub mod tree;
pub mod verifier;

pub use analytic::{AnalyticError, FixedPointResult, Threshold};
pub use counter::{
    count_colorings, count_independent_sets, rewire_count_demo, CountEstimate, CountOptions, CounterError, Method,
    Model, RewireReport, RewireStepReport,
};
pub use graph::{Graph, GraphError, GraphKind, GraphMetrics, NamedGraph, RewireStep};
pub use oracle::{Activity, OracleConfig, OracleError, OracleResult, Value};
pub use tree::{BoundaryCondition, Occupancy, ProbInterval, RootedTree, TreeError};
pub use verifier::{CertificationReport, GridMax, GridSpec, VerifierError};
