//! Deterministic lattice flocking with pinning navigation and local
//! negotiation of heterogeneous separation parameters.
//!
//! Agents follow double-integrator dynamics driven by the negated sum of a
//! Lennard-Jones cohesion gradient, a velocity-alignment gradient and, for
//! pinned agents, a navigation gradient toward a reference. Each agent keeps a
//! desired separation per neighbour, estimates the neighbour's preference from
//! observed distance alone, and moves toward agreement only while that estimate
//! stays inside its own admissible interval.

pub mod config;
pub mod engine;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod negotiation;
pub mod output;
pub mod potentials;

pub use engine::{run, FlockState, MetricsSink, RunRecord, Simulation};
pub use error::{Error, Result};
pub use graph::FlockGraph;
pub use metrics::{Heatmap, MetricsFrame};
pub use model::{
    AgentParams, AgentState, Distribution, Gains, PairState, ReferenceState, ScenarioConfig, Vec2,
};
pub use negotiation::{PairId, PairTable};
