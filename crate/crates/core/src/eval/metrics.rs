use serde::{Deserialize, Serialize};

use crate::env::{Done, EpisodeConfig, RewardConfig};
use crate::error::{Error, Result};

use super::{DiscomfortAggregation, EvalConfig, IntersectionCounting, TrialRecord};

/// What a report was measured under. Two reports are comparable only when
/// their settings agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub n_pedestrians: usize,
    pub single_group: bool,
    pub trials: usize,
    pub seed: u64,
    pub d_coll: f64,
    pub d_disc: f64,
    pub intersection_counting: IntersectionCounting,
    pub discomfort: DiscomfortAggregation,
}

impl ReportSettings {
    pub fn new(env: &EpisodeConfig, reward: &RewardConfig, eval: &EvalConfig) -> Self {
        Self {
            n_pedestrians: env.n_pedestrians,
            single_group: env.single_group,
            trials: eval.trials,
            seed: eval.seed,
            d_coll: reward.d_coll,
            d_disc: reward.d_disc,
            intersection_counting: eval.intersection_counting,
            discomfort: eval.discomfort,
        }
    }
}

/// Per-trial values of every compared metric. `None` marks a trial that
/// contributes no sample (time to goal of a failed trial, angle of a trial
/// where every pedestrian stood still).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub time_to_goal: Option<f64>,
    pub robot_velocity: Option<f64>,
    pub pedestrian_velocity: Option<f64>,
    pub pedestrian_angle: Option<f64>,
    pub discomfort: Option<f64>,
    pub pedestrian_social_force: Option<f64>,
    pub robot_social_force: Option<f64>,
    pub intersections: usize,
}

fn mean_of<'a>(xs: impl IntoIterator<Item = &'a f64>) -> Option<f64> {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn trial_metrics(rec: &TrialRecord, settings: &ReportSettings) -> TrialMetrics {
    let violating: Vec<f64> = rec
        .distances
        .iter()
        .flatten()
        .copied()
        .filter(|&d| d >= settings.d_coll && d < settings.d_disc)
        .collect();
    let discomfort = match settings.discomfort {
        DiscomfortAggregation::Sum => Some(violating.iter().sum()),
        DiscomfortAggregation::Mean => mean_of(&violating),
    };

    let mut intersections = 0;
    let mut penetrated = vec![false; rec.group_sizes.len()];
    for step in &rec.hull_distances {
        for (g, &d) in step.iter().enumerate() {
            if rec.group_sizes[g] >= 2 && d <= 0.0 {
                match settings.intersection_counting {
                    IntersectionCounting::PerStep => intersections += 1,
                    IntersectionCounting::PerGroup if !penetrated[g] => intersections += 1,
                    IntersectionCounting::PerGroup => {}
                }
                penetrated[g] = true;
            }
        }
    }

    TrialMetrics {
        time_to_goal: rec.time_to_goal,
        robot_velocity: mean_of(&rec.robot_speeds),
        pedestrian_velocity: mean_of(rec.pedestrian_speeds.iter().flatten()),
        pedestrian_angle: mean_of(rec.pedestrian_goal_angles.iter().flatten().flatten()),
        discomfort,
        pedestrian_social_force: mean_of(rec.pedestrian_social_forces.iter().flatten()),
        robot_social_force: mean_of(&rec.robot_social_forces),
        intersections,
    }
}

/// Mean and sample standard deviation of the per-trial values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl MetricSummary {
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        let n = xs.len();
        let mean = mean_of(xs)?;
        let std = if n > 1 {
            (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub settings: ReportSettings,
    pub trials: usize,
    pub successes: usize,
    pub collisions: usize,
    pub timeouts: usize,
    pub group_intersections: usize,
    pub mean_group_count: f64,
    pub time_to_goal: Option<MetricSummary>,
    pub robot_velocity: Option<MetricSummary>,
    pub pedestrian_velocity: Option<MetricSummary>,
    pub pedestrian_angle: Option<MetricSummary>,
    pub discomfort: Option<MetricSummary>,
    pub pedestrian_social_force: Option<MetricSummary>,
    pub robot_social_force: Option<MetricSummary>,
}

/// Metric names in table order, paired with their per-trial accessor.
pub(crate) const METRICS: [(&str, fn(&TrialMetrics) -> Option<f64>); 7] = [
    ("time_to_goal", |m| m.time_to_goal),
    ("robot_velocity", |m| m.robot_velocity),
    ("pedestrian_velocity", |m| m.pedestrian_velocity),
    ("pedestrian_angle", |m| m.pedestrian_angle),
    ("discomfort", |m| m.discomfort),
    ("pedestrian_social_force", |m| m.pedestrian_social_force),
    ("robot_social_force", |m| m.robot_social_force),
];

pub(crate) fn samples(per_trial: &[TrialMetrics], f: fn(&TrialMetrics) -> Option<f64>) -> Vec<f64> {
    per_trial.iter().filter_map(f).collect()
}

impl MetricsReport {
    pub fn summary(&self, name: &str) -> Option<&MetricSummary> {
        match name {
            "time_to_goal" => self.time_to_goal.as_ref(),
            "robot_velocity" => self.robot_velocity.as_ref(),
            "pedestrian_velocity" => self.pedestrian_velocity.as_ref(),
            "pedestrian_angle" => self.pedestrian_angle.as_ref(),
            "discomfort" => self.discomfort.as_ref(),
            "pedestrian_social_force" => self.pedestrian_social_force.as_ref(),
            "robot_social_force" => self.robot_social_force.as_ref(),
            _ => None,
        }
    }

    /// Plain-text table, one metric per row.
    pub fn render(&self, label: &str) -> String {
        let s = &self.settings;
        let mut out = format!(
            "{label}: {} pedestrians, {}, {} trials (seed {})\n",
            s.n_pedestrians,
            if s.single_group { "single group" } else { "multiple groups" },
            s.trials,
            s.seed
        );
        out += &format!("  {:<28}{:>10}\n", "successes", self.successes);
        out += &format!("  {:<28}{:>10}\n", "pedestrian collisions", self.collisions);
        out += &format!("  {:<28}{:>10}\n", "timeouts", self.timeouts);
        out += &format!("  {:<28}{:>10}\n", "group intersections", self.group_intersections);
        out += &format!("  {:<28}{:>10.3}\n", "mean group count", self.mean_group_count);
        for (name, _) in METRICS {
            match self.summary(name) {
                Some(m) => out += &format!("  {:<28}{:>10.3} ± {:.3} (n={})\n", name, m.mean, m.std, m.n),
                None => out += &format!("  {:<28}{:>10}\n", name, "-"),
            }
        }
        out
    }
}

pub fn compute_metrics(records: &[TrialRecord], settings: &ReportSettings) -> Result<MetricsReport> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no trial records to summarize".into()));
    }
    let per_trial: Vec<TrialMetrics> = records.iter().map(|r| trial_metrics(r, settings)).collect();
    let count = |d: Done| records.iter().filter(|r| r.outcome == d).count();
    let summary = |i: usize| MetricSummary::from_samples(&samples(&per_trial, METRICS[i].1));
    Ok(MetricsReport {
        settings: settings.clone(),
        trials: records.len(),
        successes: count(Done::Goal),
        collisions: count(Done::Collision),
        timeouts: count(Done::Timeout),
        group_intersections: per_trial.iter().map(|m| m.intersections).sum(),
        mean_group_count: records.iter().map(|r| r.group_sizes.len() as f64).sum::<f64>()
            / records.len() as f64,
        time_to_goal: summary(0),
        robot_velocity: summary(1),
        pedestrian_velocity: summary(2),
        pedestrian_angle: summary(3),
        discomfort: summary(4),
        pedestrian_social_force: summary(5),
        robot_social_force: summary(6),
    })
}
