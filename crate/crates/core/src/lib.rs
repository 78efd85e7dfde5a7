//! Thompson-sampling bandits for adaptive experiments with student features.
//!
//! The crate simulates non-contextual (Beta-Bernoulli) and contextual
//! (Bayesian logistic) Thompson sampling against synthetic outcome models
//! and against resampled logged experiments, and computes per-trial metrics
//! of optimality, reward and policy disparity.

pub mod env;
pub mod error;
pub mod io;
pub mod metrics;
pub mod policy;
pub mod rng;
pub mod sim;

pub use error::{Error, ErrorKind, Result};
pub use metrics::{summarize_batch, DisparityEstimator, MetricRow};
pub use policy::{PolicyKind, PolicyState, Priors};
pub use sim::{run_batch, run_replay_batch, run_trial, BatchOutput, TrialRecord, TrialSetup};
