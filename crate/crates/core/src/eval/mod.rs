//! Evaluation protocol: greedy rollouts over seeded circle-crossing trials,
//! navigation and social-compliance metrics, and pooled t-tests between
//! policies.

mod compare;
mod metrics;
mod ttest;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::log::TrajectoryRecord;
use crate::env::{ActionTable, CrowdEnv, Done, EpisodeConfig, RewardBreakdown, RewardConfig};
use crate::error::{Error, Result};
use crate::neural::{forward, PolicyParams};
use crate::rng::{rng_for, stream};
use crate::social_force::SfmParams;

pub use compare::{compare_policies, Comparison, ComparisonRow, SIGNIFICANCE_LEVEL};
pub use metrics::{compute_metrics, trial_metrics, MetricSummary, MetricsReport, ReportSettings, TrialMetrics};
pub use ttest::{pooled_t_test, regularized_incomplete_beta, two_tailed_p, TTestResult};

/// How robot-group hull penetrations are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntersectionCounting {
    /// Once per (trial, group) on the first penetration.
    PerGroup,
    /// Once per (step, group) inside the hull.
    PerStep,
}

/// How per-trial individual discomfort is aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscomfortAggregation {
    /// Sum of violating distances over (step, pedestrian).
    Sum,
    /// Mean of violating distances over (step, pedestrian).
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub trials: usize,
    pub seed: u64,
    pub intersection_counting: IntersectionCounting,
    pub discomfort: DiscomfortAggregation,
    pub parallel: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            trials: 250,
            seed: 0,
            intersection_counting: IntersectionCounting::PerGroup,
            discomfort: DiscomfortAggregation::Sum,
            parallel: true,
        }
    }
}

/// Everything recorded about one evaluation trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub outcome: Done,
    pub steps: usize,
    pub dt: f64,
    /// Seconds; successful trials only.
    pub time_to_goal: Option<f64>,
    pub total_reward: f64,
    pub group_sizes: Vec<usize>,
    /// Per-step samples, one entry per step taken.
    pub robot_speeds: Vec<f64>,
    pub pedestrian_speeds: Vec<Vec<f64>>,
    pub pedestrian_goal_angles: Vec<Vec<Option<f64>>>,
    pub distances: Vec<Vec<f64>>,
    pub hull_distances: Vec<Vec<f64>>,
    pub pedestrian_social_forces: Vec<Vec<f64>>,
    pub robot_social_forces: Vec<f64>,
}

/// Action selection for a rollout.
pub trait Controller {
    fn act(&mut self, env: &CrowdEnv) -> Result<usize>;
}

/// Greedy (argmax) policy.
pub struct GreedyPolicy<'a>(pub &'a PolicyParams);

impl Controller for GreedyPolicy<'_> {
    fn act(&mut self, env: &CrowdEnv) -> Result<usize> {
        Ok(forward(self.0, &env.observation())?.greedy_action())
    }
}

impl<F: FnMut(&CrowdEnv) -> usize> Controller for F {
    fn act(&mut self, env: &CrowdEnv) -> Result<usize> {
        Ok(self(env))
    }
}

/// Runs `env` to termination under `controller`, optionally logging every step.
pub fn run_episode<C: Controller>(
    mut env: CrowdEnv,
    controller: &mut C,
    trial: usize,
    log: bool,
) -> Result<(TrialRecord, Option<Vec<TrajectoryRecord>>)> {
    let dt = env.config().dt;
    let group_sizes = env.layout().group_sizes();
    let mut rec = TrialRecord {
        trial,
        outcome: Done::Running,
        steps: 0,
        dt,
        time_to_goal: None,
        total_reward: 0.0,
        group_sizes,
        robot_speeds: Vec::new(),
        pedestrian_speeds: Vec::new(),
        pedestrian_goal_angles: Vec::new(),
        distances: Vec::new(),
        hull_distances: Vec::new(),
        pedestrian_social_forces: Vec::new(),
        robot_social_forces: Vec::new(),
    };
    let mut trajectory = log.then(|| vec![TrajectoryRecord::capture(&env, RewardBreakdown::default())]);
    loop {
        let action = controller.act(&env)?;
        let t = env.step(action)?;
        rec.total_reward += t.reward;
        let info = t.info;
        rec.robot_speeds.push(info.robot_speed);
        rec.pedestrian_speeds.push(info.pedestrian_speeds);
        rec.pedestrian_goal_angles.push(info.pedestrian_goal_angles);
        rec.distances.push(info.distances);
        rec.hull_distances.push(info.hull_distances.iter().map(|&(_, d)| d).collect());
        rec.pedestrian_social_forces.push(info.pedestrian_social_forces);
        rec.robot_social_forces.push(info.robot_social_force);
        if let Some(traj) = trajectory.as_mut() {
            traj.push(TrajectoryRecord::capture(&env, t.breakdown));
        }
        if t.done.is_terminal() {
            rec.outcome = t.done;
            rec.steps = env.steps();
            if t.done == Done::Goal {
                rec.time_to_goal = Some(rec.steps as f64 * dt);
            }
            break;
        }
    }
    Ok((rec, trajectory))
}

/// Environment for evaluation trial `trial`; the scenario depends only on
/// `(seed, trial)` so different policies face identical draws.
pub fn trial_env(
    env_cfg: &EpisodeConfig,
    reward: &RewardConfig,
    sfm: &SfmParams,
    seed: u64,
    trial: usize,
) -> Result<CrowdEnv> {
    let mut rng = rng_for(seed, &[stream::EVAL, trial as u64]);
    CrowdEnv::new(env_cfg.clone(), reward.clone(), sfm.clone(), &mut rng)
}

/// Greedy evaluation over `cfg.trials` trials. Records come back in trial order.
pub fn run_evaluation(
    params: &PolicyParams,
    env_cfg: &EpisodeConfig,
    reward: &RewardConfig,
    sfm: &SfmParams,
    cfg: &EvalConfig,
    log: bool,
) -> Result<Vec<(TrialRecord, Option<Vec<TrajectoryRecord>>)>> {
    let run = |trial: usize| {
        let env = trial_env(env_cfg, reward, sfm, cfg.seed, trial)?;
        run_episode(env, &mut GreedyPolicy(params), trial, log)
    };
    if cfg.parallel {
        (0..cfg.trials).into_par_iter().map(run).collect()
    } else {
        (0..cfg.trials).map(run).collect()
    }
}

/// Full-speed motion straight at the goal, snapped to the nearest action.
pub struct StraightLine;

impl Controller for StraightLine {
    fn act(&mut self, env: &CrowdEnv) -> Result<usize> {
        let r = env.robot();
        let dir = (r.goal - r.position).normalized().unwrap_or_default();
        Ok(ActionTable::get().nearest_index(dir * r.v_pref))
    }
}

/// One JSON object per trial.
pub fn write_records(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let text = std::fs::read_to_string(path)?;
    let records = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| Error::MalformedLog {
                path: path.to_path_buf(),
                message: format!("line {}: {e}", n + 1),
            })
        })
        .collect::<Result<Vec<TrialRecord>>>()?;
    if records.is_empty() {
        return Err(Error::MalformedLog { path: path.to_path_buf(), message: "no records".into() });
    }
    Ok(records)
}
