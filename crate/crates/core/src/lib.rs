//! Cooperative online learning with feedback graphs.
//!
//! Agents sit on a communication network and play arms of a feedback graph.
//! Each agent runs the same exponential-weights learner on importance-weighted
//! loss estimates built from its own feedback and the delayed messages of its
//! network neighbors.

pub mod agent;
pub mod environment;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod rng;
pub mod simulator;
pub mod verify;

pub use agent::{AgentState, FeedbackMessage, FeedbackView, LearningRate};
pub use environment::{ActivationSchedule, LossTable};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentSpec};
pub use graph::{AlphaResult, DistanceMatrix, Graph};
pub use simulator::{EtaPolicy, RegretTrace, SimConfig, SimOptions};
