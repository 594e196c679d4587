//! Proximal policy optimization with generalized advantage estimation.
//!
//! Each iteration runs every environment worker for one short window against
//! a frozen parameter snapshot, computes advantages per worker, then performs
//! several epochs of clipped-surrogate minibatch updates with Adam.

mod gae;
mod rollout;
mod trainer;
mod update;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gae::compute_gae;
pub use rollout::{collect_rollouts, EnvWorker, Experience, RolloutBatch, WorkerSnapshot};
pub use trainer::{train, CurveRecord, TrainConfig, TrainOutcome, Trainer};
pub use update::{clipped_surrogate, normalize_advantages, ppo_update, UpdateStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    /// Steps per environment per iteration.
    pub window: usize,
    /// Environment workers, one window each per iteration.
    pub windows_per_batch: usize,
    pub epochs: usize,
    pub minibatches: usize,
    pub clip_epsilon: f64,
    pub value_coeff: f64,
    pub entropy_coeff: f64,
    pub grad_clip_norm: f64,
    pub iterations: usize,
    pub lr: f64,
    pub adam_eps: f64,
    /// Linearly decay the learning rate to zero over the run.
    pub anneal_lr: bool,
    /// Write a checkpoint every this many iterations (0 disables periodic checkpoints).
    pub checkpoint_every: usize,
    pub seed: u64,
    /// Collect rollouts on the rayon pool.
    pub parallel: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_lambda: 0.95,
            window: 16,
            windows_per_batch: 64,
            epochs: 3,
            minibatches: 4,
            clip_epsilon: 0.1,
            value_coeff: 1.0,
            entropy_coeff: 0.01,
            grad_clip_norm: 0.5,
            iterations: 7000,
            lr: 2.5e-4,
            adam_eps: 1e-5,
            anneal_lr: false,
            checkpoint_every: 500,
            seed: 0,
            parallel: true,
        }
    }
}

impl PpoConfig {
    pub fn batch_size(&self) -> usize {
        self.window * self.windows_per_batch
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("ppo.gamma and ppo.gae_lambda must lie in [0, 1]".into());
        }
        if self.window == 0 || self.windows_per_batch == 0 || self.epochs == 0 || self.minibatches == 0 {
            return bad("ppo window, windows_per_batch, epochs and minibatches must be >= 1".into());
        }
        if self.minibatches > self.batch_size() {
            return bad("ppo.minibatches exceeds the batch size".into());
        }
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return bad(format!("ppo.clip_epsilon must lie in (0, 1), got {}", self.clip_epsilon));
        }
        for (name, v) in [
            ("value_coeff", self.value_coeff),
            ("entropy_coeff", self.entropy_coeff),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("ppo.{name} must be >= 0"));
            }
        }
        for (name, v) in [("grad_clip_norm", self.grad_clip_norm), ("lr", self.lr), ("adam_eps", self.adam_eps)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("ppo.{name} must be positive"));
            }
        }
        Ok(())
    }
}
