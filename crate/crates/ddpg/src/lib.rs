//! Deep deterministic policy gradient written directly on top of `ndarray`:
//! ReLU/tanh perceptrons with hand-written back-propagation, Adam, a ring
//! replay buffer and soft-updated target networks.
//!
//! [`ris`] turns the RIS/UAV downlink into an environment and provides the
//! interference-cancellation, one-element-one-UAV and joint agents together
//! with the random-search baseline.

pub mod adam;
pub mod agent;
pub mod mlp;
pub mod replay;
pub mod ris;
pub mod train;

use thiserror::Error;

pub use agent::{ActionValue, Critic, DdpgAgent, Hyperparams};
pub use mlp::{Gradients, Mlp, OutputActivation};
pub use replay::{Batch, ReplayBuffer, Transition};
pub use ris::{run_random_search, run_training, Objective, TrainingConfig, TrainingTrace, Variant};
pub use train::{train, Environment, QuadraticBandit, Schedule, Step};

#[derive(Debug, Error)]
pub enum DdpgError {
    #[error("expected input of length {expected}, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("networks or environment do not share a structure")]
    StructureMismatch,
    #[error("replay buffer holds {len} transitions, cannot sample {batch_size}")]
    Underfilled { len: usize, batch_size: usize },
    #[error("invalid hyperparameter `{field}`: {reason}")]
    Hyperparam { field: &'static str, reason: String },
    #[error(transparent)]
    Scene(#[from] ris_core::SceneError),
}
