use serde::{Deserialize, Serialize};

use crate::env::{Done, EpisodeConfig, RewardConfig};
use crate::error::{Error, Result};
use crate::neural::{init_params, AdamState, Checkpoint, PolicyParams};
use crate::rng::{derive_seed, rng_for, stream};
use crate::social_force::SfmParams;

use super::rollout::WorkerSnapshot;
use super::{collect_rollouts, ppo_update, EnvWorker, PpoConfig, RolloutBatch, UpdateStats};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainConfig {
    pub env: EpisodeConfig,
    pub reward: RewardConfig,
    pub sfm: SfmParams,
    pub ppo: PpoConfig,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.reward.validate()?;
        self.sfm.validate()?;
        self.ppo.validate()
    }
}

/// One learning-curve line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub iteration: usize,
    /// Experiences collected so far (window x workers per iteration).
    pub env_steps: u64,
    /// Transitions belonging to episodes that have finished so far.
    pub episode_steps: u64,
    pub episodes: usize,
    pub mean_episode_reward: Option<f64>,
    pub min_episode_reward: Option<f64>,
    pub max_episode_reward: Option<f64>,
    pub successes: usize,
    pub collisions: usize,
    pub timeouts: usize,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub grad_norm: f64,
    pub lr: f64,
}

impl CurveRecord {
    fn new(iteration: usize, env_steps: u64, episode_steps: u64, batch: &RolloutBatch, stats: UpdateStats, lr: f64) -> Self {
        let r = &batch.episode_rewards;
        let count = |d: Done| batch.outcomes.iter().filter(|&&o| o == d).count();
        Self {
            iteration,
            env_steps,
            episode_steps,
            episodes: r.len(),
            mean_episode_reward: (!r.is_empty()).then(|| r.iter().sum::<f64>() / r.len() as f64),
            min_episode_reward: r.iter().copied().reduce(f64::min),
            max_episode_reward: r.iter().copied().reduce(f64::max),
            successes: count(Done::Goal),
            collisions: count(Done::Collision),
            timeouts: count(Done::Timeout),
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            approx_kl: stats.approx_kl,
            clip_fraction: stats.clip_fraction,
            grad_norm: stats.grad_norm,
            lr,
        }
    }
}

/// Training state that can be advanced one iteration at a time and resumed
/// from a checkpoint.
#[derive(Debug, Clone)]
pub struct Trainer {
    cfg: TrainConfig,
    params: PolicyParams,
    adam: AdamState,
    workers: Vec<EnvWorker>,
    iteration: usize,
    env_steps: u64,
    episode_steps: u64,
}

impl Trainer {
    pub fn new(cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let params = init_params(&mut rng_for(cfg.ppo.seed, &[stream::INIT]));
        let workers = Self::make_workers(&cfg)?;
        Ok(Self { cfg, params, adam: AdamState::default(), workers, iteration: 0, env_steps: 0, episode_steps: 0 })
    }

    fn make_workers(cfg: &TrainConfig) -> Result<Vec<EnvWorker>> {
        let scenario_seed = derive_seed(cfg.ppo.seed, &[stream::SCENARIO]);
        (0..cfg.ppo.windows_per_batch as u64)
            .map(|id| EnvWorker::new(id, scenario_seed, &cfg.env, &cfg.reward, &cfg.sfm))
            .collect()
    }

    /// Rebuilds a trainer from a checkpoint written by [`Trainer::checkpoint`].
    pub fn resume(cfg: TrainConfig, ckpt: &Checkpoint) -> Result<Self> {
        cfg.validate()?;
        let bad = |m: &str| Error::CorruptCheckpoint(m.to_string());
        let parse = |key: &str| -> Result<u64> {
            ckpt.meta(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(&format!("missing or malformed meta {key}")))
        };
        let iteration = parse("iteration")? as usize;
        let env_steps = parse("env_steps")?;
        let episode_steps = parse("episode_steps")?;
        let snaps: Vec<WorkerSnapshot> = serde_json::from_str(
            ckpt.meta("workers").ok_or_else(|| bad("missing worker state"))?,
        )
        .map_err(|e| bad(&format!("worker state: {e}")))?;
        let mut workers = Self::make_workers(&cfg)?;
        if snaps.len() != workers.len() {
            return Err(bad("worker count does not match ppo.windows_per_batch"));
        }
        for (w, s) in workers.iter_mut().zip(snaps) {
            w.restore(s);
        }
        Ok(Self {
            cfg,
            params: ckpt.params.clone(),
            adam: ckpt.adam.clone(),
            workers,
            iteration,
            env_steps,
            episode_steps,
        })
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_finished(&self) -> bool {
        self.iteration >= self.cfg.ppo.iterations
    }

    fn current_lr(&self) -> f64 {
        let ppo = &self.cfg.ppo;
        if ppo.anneal_lr && ppo.iterations > 0 {
            ppo.lr * (1.0 - self.iteration as f64 / ppo.iterations as f64)
        } else {
            ppo.lr
        }
    }

    /// Collects one batch without updating; exposed for determinism checks.
    pub fn peek_batch(&self) -> Result<RolloutBatch> {
        let mut workers = self.workers.clone();
        collect_rollouts(&self.params, &mut workers, &self.cfg.ppo, self.iteration as u64)
    }

    /// Collect, estimate advantages, update. Returns the learning-curve line.
    pub fn step(&mut self) -> Result<CurveRecord> {
        let it = self.iteration as u64;
        let lr = self.current_lr();
        let batch = collect_rollouts(&self.params, &mut self.workers, &self.cfg.ppo, it)?;
        let stats = ppo_update(&mut self.params, &mut self.adam, &batch, &self.cfg.ppo, lr, it)?;
        self.env_steps += batch.len() as u64;
        self.episode_steps += batch.episode_lengths.iter().sum::<usize>() as u64;
        self.iteration += 1;
        Ok(CurveRecord::new(self.iteration, self.env_steps, self.episode_steps, &batch, stats, lr))
    }

    pub fn checkpoint(&self) -> Result<Checkpoint> {
        let snaps: Vec<WorkerSnapshot> = self.workers.iter().map(EnvWorker::snapshot).collect();
        let mut ckpt = Checkpoint::new(self.params.clone(), self.adam.clone());
        ckpt.meta = vec![
            ("iteration".into(), self.iteration.to_string()),
            ("env_steps".into(), self.env_steps.to_string()),
            ("episode_steps".into(), self.episode_steps.to_string()),
            ("group_term_enabled".into(), self.cfg.reward.group_term_enabled.to_string()),
            ("workers".into(), serde_json::to_string(&snaps)?),
        ];
        Ok(ckpt)
    }
}

pub struct TrainOutcome {
    pub params: PolicyParams,
    pub curve: Vec<CurveRecord>,
}

/// Runs the full schedule. `sink` receives periodic checkpoints
/// (`final == false`) and the final one (`final == true`); `progress` sees
/// every learning-curve line as it is produced.
pub fn train(
    cfg: TrainConfig,
    mut sink: impl FnMut(&Checkpoint, bool) -> Result<()>,
    mut progress: impl FnMut(&CurveRecord),
) -> Result<TrainOutcome> {
    let every = cfg.ppo.checkpoint_every;
    let mut trainer = Trainer::new(cfg)?;
    let mut curve = Vec::with_capacity(trainer.cfg.ppo.iterations);
    while !trainer.is_finished() {
        let rec = trainer.step()?;
        progress(&rec);
        curve.push(rec);
        if every > 0 && trainer.iteration % every == 0 && !trainer.is_finished() {
            sink(&trainer.checkpoint()?, false)?;
        }
    }
    sink(&trainer.checkpoint()?, true)?;
    Ok(TrainOutcome { params: trainer.params, curve })
}
