//! Actor-critic networks and PPO training for rule-selection dispatching.

pub mod adam;
pub mod checkpoint;
pub mod error;
pub mod net;
pub mod ppo;
pub mod train;

pub use adam::Adam;
pub use checkpoint::{Checkpoint, CheckpointMeta};
pub use error::{Result, RlError};
pub use net::{greedy_action, policy_distribution, sample_action, Distribution, PolicyValueNet};
pub use ppo::{advantage_normalization, compute_gae, ppo_loss_and_grad, ppo_losses, LossTerms, PpoConfig, RolloutBuffer};
pub use train::{train, train_with, Environment, FjspEpisodes, RolloutStats, TrainOutcome};
