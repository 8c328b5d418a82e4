//! Rate-aware, deadline-aware network-coded broadcast scheduling for a
//! single-hop wireless neighbourhood, with comparison baselines, an
//! exhaustive oracle for small instances, and an experiment harness.

// `!(x > 0.0)` is deliberate: NaN must fail positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accounting;
pub mod baselines;
pub mod clique;
pub mod error;
pub mod graph;
pub mod harness;
pub mod io;
pub mod model;
pub mod oracle;
pub mod scheduler;

pub use baselines::{run_dsf, run_sin1};
pub use clique::{max_weight_clique, CliqueResult};
pub use error::{Result, RsncError};
pub use graph::{build_graph, build_rate_agnostic_graph, update_graph, CodingGraph, Vertex};
pub use model::{
    Algorithm, DestId, DestinationState, PacketId, Request, RequestOutcome, Scenario, Transmission, TransmissionLog,
    EPS,
};
pub use oracle::{optimal_schedule, OracleLimits};
pub use scheduler::{plan_one_propagation, run_rsnc, PropagationDecision, RsncRun};
