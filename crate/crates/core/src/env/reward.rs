//! Five-term navigation reward: progress, goal bonus, discomfort, collision and
//! group-space intrusion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{GroupLayout, Observation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub c_prog: f64,
    pub c_goal: f64,
    pub c_disc: f64,
    pub c_coll: f64,
    pub c_group: f64,
    /// Centre distance below which two entities collide (m).
    pub d_coll: f64,
    /// Centre distance below which a pedestrian is uncomfortable (m).
    pub d_disc: f64,
    /// When false the group term is dropped entirely (baseline policy).
    pub group_term_enabled: bool,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            c_prog: 0.1,
            c_goal: 1.0,
            c_disc: 0.5,
            c_coll: 0.25,
            c_group: 0.25,
            d_coll: 0.6,
            d_disc: 0.8,
            group_term_enabled: true,
        }
    }
}

impl RewardConfig {
    pub fn baseline() -> Self {
        Self { group_term_enabled: false, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_prog", self.c_prog),
            ("c_goal", self.c_goal),
            ("c_disc", self.c_disc),
            ("c_coll", self.c_coll),
            ("c_group", self.c_group),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("reward.{name} must be >= 0, got {v}")));
            }
        }
        if !(self.d_coll > 0.0 && self.d_disc > self.d_coll) {
            return Err(Error::InvalidArgument(
                "reward distances must satisfy 0 < d_coll < d_disc".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub progress: f64,
    pub goal: f64,
    pub discomfort: f64,
    pub collision: f64,
    pub group: f64,
}

impl RewardBreakdown {
    pub fn total(&self) -> f64 {
        self.progress + self.goal + self.discomfort + self.collision + self.group
    }
}

/// Reward for the transition `prev -> next`. `layout` must hold hulls for `next`.
pub fn compute_reward(
    prev: &Observation,
    next: &Observation,
    layout: &GroupLayout,
    cfg: &RewardConfig,
) -> (f64, RewardBreakdown) {
    let mut b = RewardBreakdown {
        progress: cfg.c_prog * (prev.robot.goal_distance() - next.robot.goal_distance()),
        ..Default::default()
    };
    if next.robot.goal_distance() < cfg.d_coll {
        b.goal = cfg.c_goal;
    }

    let robot = next.robot.position;
    let mut discomfort = 0.0;
    let mut collisions = 0usize;
    for ped in &next.pedestrians {
        let d = robot.distance(ped.position);
        if d < cfg.d_coll {
            collisions += 1;
        } else if d <= cfg.d_disc {
            discomfort += cfg.d_disc - d;
        }
    }
    b.discomfort = -cfg.c_disc * discomfort;
    b.collision = -cfg.c_coll * collisions as f64;

    if cfg.group_term_enabled {
        let intrusions = layout
            .hull_distances(robot)
            .into_iter()
            .filter(|&(size, d)| size >= 2 && d < cfg.d_coll)
            .count();
        b.group = -cfg.c_group * intrusions as f64;
    }
    (b.total(), b)
}
