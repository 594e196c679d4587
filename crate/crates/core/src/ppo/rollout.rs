use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{CrowdEnv, Done, EpisodeConfig, Observation, RewardConfig, Scene};
use crate::error::Result;
use crate::neural::{forward, PolicyParams};
use crate::rng::{rng_for, stream};
use crate::social_force::SfmParams;

use super::{compute_gae, PpoConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub observation: Observation,
    pub action: usize,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    pub done: bool,
    pub advantage: f64,
    pub ret: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RolloutBatch {
    pub experiences: Vec<Experience>,
    /// Total reward of every episode that finished during collection.
    pub episode_rewards: Vec<f64>,
    pub episode_lengths: Vec<usize>,
    pub outcomes: Vec<Done>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.experiences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experiences.is_empty()
    }
}

/// One environment instance with its episode bookkeeping.
#[derive(Debug, Clone)]
pub struct EnvWorker {
    pub id: u64,
    pub env: CrowdEnv,
    /// Index of the current episode on this worker.
    pub episode: u64,
    pub episode_reward: f64,
    seed: u64,
}

/// Serializable snapshot of a worker, used to resume training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerSnapshot {
    pub id: u64,
    pub episode: u64,
    pub episode_reward: f64,
    pub steps: usize,
    pub done: Done,
    pub scene: Scene,
}

impl EnvWorker {
    /// Scenario streams are keyed by (seed, worker id, episode index).
    pub fn new(
        id: u64,
        seed: u64,
        env_cfg: &EpisodeConfig,
        reward_cfg: &RewardConfig,
        sfm: &SfmParams,
    ) -> Result<Self> {
        let mut rng = rng_for(seed, &[stream::SCENARIO, id, 0]);
        let env = CrowdEnv::new(env_cfg.clone(), reward_cfg.clone(), sfm.clone(), &mut rng)?;
        Ok(Self { id, env, episode: 0, episode_reward: 0.0, seed })
    }

    fn next_episode(&mut self) -> Result<()> {
        self.episode += 1;
        self.episode_reward = 0.0;
        let mut rng = rng_for(self.seed, &[stream::SCENARIO, self.id, self.episode]);
        self.env.reset(&mut rng)?;
        Ok(())
    }

    pub fn snapshot(&self) -> WorkerSnapshot {
        WorkerSnapshot {
            id: self.id,
            episode: self.episode,
            episode_reward: self.episode_reward,
            steps: self.env.steps(),
            done: self.env.done(),
            scene: self.env.scene(),
        }
    }

    pub fn restore(&mut self, snap: WorkerSnapshot) {
        self.id = snap.id;
        self.episode = snap.episode;
        self.episode_reward = snap.episode_reward;
        self.env.restore(snap.scene, snap.steps, snap.done);
    }

    /// Runs one window and returns its experiences with advantages filled in,
    /// plus `(reward, length, outcome)` for each episode finished.
    fn run_window(
        &mut self,
        params: &PolicyParams,
        cfg: &PpoConfig,
        iteration: u64,
    ) -> Result<(Vec<Experience>, Vec<(f64, usize, Done)>)> {
        let mut rng = rng_for(self.seed, &[stream::ACTIONS, iteration, self.id]);
        let mut experiences = Vec::with_capacity(cfg.window);
        let mut finished = Vec::new();
        let mut obs = self.env.observation();
        for _ in 0..cfg.window {
            let trace = forward(params, &obs)?;
            let action = trace.sample_action(rng.gen::<f64>());
            let t = self.env.step(action)?;
            self.episode_reward += t.reward;
            let done = t.done.is_terminal();
            experiences.push(Experience {
                observation: obs,
                action,
                log_prob: trace.log_policy[action],
                reward: t.reward,
                value: trace.value,
                done,
                advantage: 0.0,
                ret: 0.0,
            });
            if done {
                finished.push((self.episode_reward, self.env.steps(), t.done));
                self.next_episode()?;
                obs = self.env.observation();
            } else {
                obs = t.observation;
            }
        }
        let last_done = experiences.last().is_some_and(|e| e.done);
        let bootstrap = if last_done { 0.0 } else { forward(params, &obs)?.value };

        let rewards: Vec<f64> = experiences.iter().map(|e| e.reward).collect();
        let values: Vec<f64> = experiences.iter().map(|e| e.value).collect();
        let dones: Vec<bool> = experiences.iter().map(|e| e.done).collect();
        let (adv, ret) = compute_gae(&rewards, &values, &dones, bootstrap, cfg.gamma, cfg.gae_lambda);
        for ((e, a), r) in experiences.iter_mut().zip(adv).zip(ret) {
            e.advantage = a;
            e.ret = r;
        }
        Ok((experiences, finished))
    }
}

/// Advances every worker by one window under `params`. Worker outputs are
/// concatenated in worker order, so the batch does not depend on whether
/// collection ran in parallel.
pub fn collect_rollouts(
    params: &PolicyParams,
    workers: &mut [EnvWorker],
    cfg: &PpoConfig,
    iteration: u64,
) -> Result<RolloutBatch> {
    let results: Vec<_> = if cfg.parallel {
        workers.par_iter_mut().map(|w| w.run_window(params, cfg, iteration)).collect()
    } else {
        workers.iter_mut().map(|w| w.run_window(params, cfg, iteration)).collect()
    };
    let mut batch = RolloutBatch::default();
    for r in results {
        let (exps, finished) = r?;
        batch.experiences.extend(exps);
        for (reward, len, outcome) in finished {
            batch.episode_rewards.push(reward);
            batch.episode_lengths.push(len);
            batch.outcomes.push(outcome);
        }
    }
    Ok(batch)
}
