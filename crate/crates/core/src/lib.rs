//! Agent-based simulation of substantive and rhetorical citing.
//!
//! A fixed literature of papers is cited by a stream of agents, one per
//! timestep. Each agent reads the papers it perceives as best, substantively
//! cites those that clear its personal quality threshold, and (in the full
//! model) fills the rest of its reference list with rhetorically useful
//! papers. Two substantive-only null models switch rhetorical citing off.
//! Runs are summarized by the citation/quality correlation, citation churn,
//! and the Gini coefficient of citation counts.

pub mod cli;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod io;
pub mod metrics;
pub mod model;
pub mod reproduce;
pub mod rng;

pub use engine::{run_simulation, CitationKind, CitationSlot, ReferenceList, Trajectory};
pub use error::{Error, Result};
pub use model::{AgentMode, ModelConfig, Variant};
pub use reproduce::{reproduce_named, Experiment};
pub use rng::{Distribution, RandomStream};
