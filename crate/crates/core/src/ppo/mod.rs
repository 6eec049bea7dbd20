//! Compact proximal policy optimisation: a shared-trunk actor-critic,
//! rollout collection over independent environment workers, generalised
//! advantage estimation, clipped-surrogate updates and checkpointing.

mod adam;
mod checkpoint;
mod network;
mod rollout;
mod train;
mod update;

pub use adam::Adam;
pub use checkpoint::{PolicyCheckpoint, CHECKPOINT_FORMAT_VERSION};
pub use network::{
    argmax, log_softmax, sample_categorical, softmax, ForwardCache, PolicyNetwork, DEFAULT_HIDDEN,
};
pub use rollout::{
    collect_rollout, compute_gae, rollout_segment, EpisodeSummary, RolloutWorker, Segment, TrajectoryBatch,
};
pub use train::{train, Curriculum, TrainConfig, TrainOutcome, Trainer, UpdateRecord};
pub use update::{minibatch_loss, ppo_update, LossBreakdown, Sample, UpdateMetrics};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PPOConfig {
    pub learning_rate: f64,
    pub gamma: f64,
    pub entropy_coeff: f64,
    pub clip_epsilon: f64,
    pub gae_lambda: f64,
    /// Steps gathered per update, summed over all workers.
    pub rollout_length: usize,
    pub minibatch_size: usize,
    pub epochs_per_update: usize,
    pub value_coeff: f64,
    pub max_grad_norm: f64,
    pub total_steps: u64,
    pub num_workers: usize,
    pub hidden: usize,
    /// Give the value head its own trunk instead of sharing the policy's.
    pub separate_critic: bool,
    pub seed: u64,
}

impl Default for PPOConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            gamma: 0.99,
            entropy_coeff: 0.01,
            clip_epsilon: 0.2,
            gae_lambda: 0.95,
            rollout_length: 2048,
            minibatch_size: 64,
            epochs_per_update: 10,
            value_coeff: 0.5,
            max_grad_norm: 0.5,
            total_steps: 2_000_000,
            num_workers: 8,
            hidden: DEFAULT_HIDDEN,
            separate_critic: false,
            seed: 0,
        }
    }
}

impl PPOConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(format!("ppo: {m}")));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return fail("gamma must lie in (0, 1]");
        }
        if !(self.gae_lambda >= 0.0 && self.gae_lambda <= 1.0) {
            return fail("gae_lambda must lie in [0, 1]");
        }
        if !(self.clip_epsilon > 0.0) {
            return fail("clip_epsilon must be positive");
        }
        if !(self.learning_rate >= 0.0) || !(self.entropy_coeff >= 0.0) || !(self.value_coeff >= 0.0) {
            return fail("learning_rate, entropy_coeff and value_coeff must be non-negative");
        }
        if self.minibatch_size == 0 || self.rollout_length == 0 {
            return fail("rollout_length and minibatch_size must be positive");
        }
        if self.rollout_length % self.minibatch_size != 0 {
            return fail("rollout_length must be divisible by minibatch_size");
        }
        if self.num_workers == 0 || self.num_workers > self.rollout_length {
            return fail("num_workers must lie in [1, rollout_length]");
        }
        if self.epochs_per_update == 0 || self.hidden == 0 {
            return fail("epochs_per_update and hidden must be positive");
        }
        Ok(())
    }
}

/// Most probable action; ties go to the lowest index.
pub fn greedy_action(policy: &PolicyNetwork, observation: &[f64]) -> usize {
    argmax(&policy.forward(observation).0)
}
