//! Episodic circle-crossing crowd environment.
//!
//! The robot crosses a circle through its centre while groups of pedestrians,
//! driven by the social force model, cross to antipodal goals. The robot picks
//! one of 81 discrete holonomic velocity commands per step.

mod actions;
mod groups;
pub mod log;
mod reward;
mod scenario;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_between, Segment, Vec2};
use crate::social_force::{self, AgentState, SfmParams};

pub use actions::{action_from_index, index_of, ActionTable, NUM_ACTIONS, NUM_HEADINGS, NUM_SPEEDS, STOP};
pub use groups::{sample_groups, GroupLayout};
pub use reward::{compute_reward, RewardBreakdown, RewardConfig};
pub use scenario::{reset_scenario, Scene};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub goal: Vec2,
    pub v_pref: f64,
    /// Heading (rad); follows the last non-zero command.
    pub theta: f64,
}

impl RobotState {
    pub fn goal_distance(&self) -> f64 {
        self.position.distance(self.goal)
    }

    /// `[px, py, vx, vy, rad, gx, gy, v_pref, theta]`
    pub fn to_array(&self) -> [f64; 9] {
        [
            self.position.x,
            self.position.y,
            self.velocity.x,
            self.velocity.y,
            self.radius,
            self.goal.x,
            self.goal.y,
            self.v_pref,
            self.theta,
        ]
    }

    pub fn from_array(a: [f64; 9]) -> Self {
        Self {
            position: Vec2::new(a[0], a[1]),
            velocity: Vec2::new(a[2], a[3]),
            radius: a[4],
            goal: Vec2::new(a[5], a[6]),
            v_pref: a[7],
            theta: a[8],
        }
    }

    /// The robot as seen by pedestrians' repulsion terms.
    pub fn as_agent(&self) -> AgentState {
        AgentState {
            position: self.position,
            velocity: self.velocity,
            radius: self.radius,
            goal: self.goal,
            v_pref: self.v_pref,
            group_id: usize::MAX,
        }
    }
}

/// Observable part of a pedestrian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PedestrianObs {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
}

impl PedestrianObs {
    /// `[px, py, vx, vy, rad]`
    pub fn to_array(&self) -> [f64; 5] {
        [self.position.x, self.position.y, self.velocity.x, self.velocity.y, self.radius]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self { position: Vec2::new(a[0], a[1]), velocity: Vec2::new(a[2], a[3]), radius: a[4] }
    }
}

impl From<&AgentState> for PedestrianObs {
    fn from(a: &AgentState) -> Self {
        Self { position: a.position, velocity: a.velocity, radius: a.radius }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub robot: RobotState,
    pub pedestrians: Vec<PedestrianObs>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub n_pedestrians: usize,
    pub single_group: bool,
    pub group_lambda: f64,
    pub circle_radius: f64,
    pub dt: f64,
    pub timeout: f64,
    pub robot_radius: f64,
    pub ped_radius: f64,
    pub v_pref: f64,
    pub seed: u64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            n_pedestrians: 5,
            single_group: false,
            group_lambda: 1.2,
            circle_radius: 4.0,
            dt: 0.25,
            timeout: 25.0,
            robot_radius: 0.3,
            ped_radius: 0.3,
            v_pref: 1.0,
            seed: 0,
        }
    }
}

impl EpisodeConfig {
    pub fn max_steps(&self) -> usize {
        (self.timeout / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.n_pedestrians == 0 {
            return bad("env.n_pedestrians must be >= 1");
        }
        for (name, v) in [
            ("group_lambda", self.group_lambda),
            ("circle_radius", self.circle_radius),
            ("dt", self.dt),
            ("timeout", self.timeout),
            ("robot_radius", self.robot_radius),
            ("ped_radius", self.ped_radius),
            ("v_pref", self.v_pref),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("env.{name} must be positive, got {v}")));
            }
        }
        let steps = self.timeout / self.dt;
        if (steps - steps.round()).abs() > 1e-9 {
            return bad("env.timeout must be an integral number of env.dt steps");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Done {
    Running,
    Goal,
    Collision,
    Timeout,
}

impl Done {
    pub fn is_terminal(self) -> bool {
        self != Done::Running
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Done::Running => "running",
            Done::Goal => "goal",
            Done::Collision => "collision",
            Done::Timeout => "timeout",
        }
    }
}

/// Per-step measurements used by the evaluation metrics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepInfo {
    pub robot_speed: f64,
    pub pedestrian_speeds: Vec<f64>,
    /// Angle (deg) between each pedestrian's velocity and its goal direction;
    /// `None` when the pedestrian is standing or at its goal.
    pub pedestrian_goal_angles: Vec<Option<f64>>,
    /// Robot-pedestrian centre distances.
    pub distances: Vec<f64>,
    /// `(group size, robot-hull distance)` per group.
    pub hull_distances: Vec<(usize, f64)>,
    /// Magnitude of the summed agent repulsion on each pedestrian, robot included.
    pub pedestrian_social_forces: Vec<f64>,
    /// Magnitude of the summed pedestrian repulsion the robot would feel.
    pub robot_social_force: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Observation,
    pub reward: f64,
    pub breakdown: RewardBreakdown,
    pub done: Done,
    pub info: StepInfo,
}

/// One environment instance.
#[derive(Debug, Clone)]
pub struct CrowdEnv {
    cfg: EpisodeConfig,
    reward_cfg: RewardConfig,
    sfm: SfmParams,
    obstacles: Vec<Segment>,
    robot: RobotState,
    pedestrians: Vec<AgentState>,
    layout: GroupLayout,
    steps: usize,
    done: Done,
}

impl CrowdEnv {
    /// Creates an environment and places the first scene drawn from `rng`.
    pub fn new<R: rand::Rng + ?Sized>(
        cfg: EpisodeConfig,
        reward_cfg: RewardConfig,
        sfm: SfmParams,
        rng: &mut R,
    ) -> Result<Self> {
        let scene = reset_scenario(&cfg, rng)?;
        Ok(Self::from_scene(cfg, reward_cfg, sfm, scene))
    }

    /// Starts an episode from a hand-built scene. Any number of pedestrians,
    /// including zero, is accepted.
    pub fn from_scene(cfg: EpisodeConfig, reward_cfg: RewardConfig, sfm: SfmParams, scene: Scene) -> Self {
        let Scene { robot, pedestrians, mut layout } = scene;
        let positions: Vec<Vec2> = pedestrians.iter().map(|p| p.position).collect();
        layout.update_hulls(&positions);
        Self {
            cfg,
            reward_cfg,
            sfm,
            obstacles: Vec::new(),
            robot,
            pedestrians,
            layout,
            steps: 0,
            done: Done::Running,
        }
    }

    pub fn with_obstacles(mut self, obstacles: Vec<Segment>) -> Self {
        self.obstacles = obstacles;
        self
    }

    /// Draws a fresh scene and restarts the episode.
    pub fn reset<R: rand::Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Observation> {
        let scene = reset_scenario(&self.cfg, rng)?;
        *self = Self::from_scene(self.cfg.clone(), self.reward_cfg.clone(), self.sfm.clone(), scene)
            .with_obstacles(std::mem::take(&mut self.obstacles));
        Ok(self.observation())
    }

    pub fn observation(&self) -> Observation {
        Observation {
            robot: self.robot.clone(),
            pedestrians: self.pedestrians.iter().map(PedestrianObs::from).collect(),
        }
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.cfg
    }

    pub fn reward_config(&self) -> &RewardConfig {
        &self.reward_cfg
    }

    pub fn robot(&self) -> &RobotState {
        &self.robot
    }

    pub fn pedestrians(&self) -> &[AgentState] {
        &self.pedestrians
    }

    pub fn layout(&self) -> &GroupLayout {
        &self.layout
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn done(&self) -> Done {
        self.done
    }

    pub fn scene(&self) -> Scene {
        Scene {
            robot: self.robot.clone(),
            pedestrians: self.pedestrians.clone(),
            layout: self.layout.clone(),
        }
    }

    /// Restores a mid-episode state captured with [`CrowdEnv::scene`].
    pub fn restore(&mut self, scene: Scene, steps: usize, done: Done) {
        let obstacles = std::mem::take(&mut self.obstacles);
        *self = Self::from_scene(self.cfg.clone(), self.reward_cfg.clone(), self.sfm.clone(), scene)
            .with_obstacles(obstacles);
        self.steps = steps;
        self.done = done;
    }

    /// Applies action `action` for one time step.
    pub fn step(&mut self, action: usize) -> Result<Transition> {
        if self.done.is_terminal() {
            return Err(Error::ContractViolation(format!(
                "step called on a finished episode ({})",
                self.done.as_str()
            )));
        }
        let command = action_from_index(action)?;
        let dt = self.cfg.dt;
        let prev = self.observation();

        // Pedestrians react to the pre-step snapshot, robot included.
        let robot_agent = self.robot.as_agent();
        let forces: Vec<_> = (0..self.pedestrians.len())
            .map(|i| {
                social_force::force_breakdown(
                    i,
                    &self.pedestrians,
                    Some(&robot_agent),
                    &self.obstacles,
                    &self.sfm,
                )
            })
            .collect();
        let robot_social: Vec2 = self
            .pedestrians
            .iter()
            .map(|p| {
                social_force::repulsion_between(
                    robot_agent.position,
                    robot_agent.radius,
                    p.position,
                    p.radius,
                    &self.sfm,
                )
            })
            .sum();

        self.pedestrians = self
            .pedestrians
            .iter()
            .zip(&forces)
            .map(|(p, f)| social_force::integrate(p, f.total(), &self.sfm, dt))
            .collect();

        self.robot.velocity = command;
        if command != Vec2::ZERO {
            self.robot.theta = command.angle();
        }
        self.robot.position += command * dt;

        let positions: Vec<Vec2> = self.pedestrians.iter().map(|p| p.position).collect();
        self.layout.update_hulls(&positions);
        self.steps += 1;

        let next = self.observation();
        let (reward, breakdown) = compute_reward(&prev, &next, &self.layout, &self.reward_cfg);

        let distances: Vec<f64> =
            positions.iter().map(|p| p.distance(self.robot.position)).collect();
        let d_coll = self.reward_cfg.d_coll;
        self.done = if distances.iter().any(|&d| d < d_coll) {
            Done::Collision
        } else if self.robot.goal_distance() < d_coll {
            Done::Goal
        } else if self.steps >= self.cfg.max_steps() {
            Done::Timeout
        } else {
            Done::Running
        };

        let info = StepInfo {
            robot_speed: self.robot.velocity.norm(),
            pedestrian_speeds: self.pedestrians.iter().map(|p| p.velocity.norm()).collect(),
            pedestrian_goal_angles: self
                .pedestrians
                .iter()
                .map(|p| {
                    let to_goal = p.goal - p.position;
                    (p.velocity != Vec2::ZERO && to_goal != Vec2::ZERO)
                        .then(|| angle_between(p.velocity, to_goal))
                })
                .collect(),
            distances,
            hull_distances: self.layout.hull_distances(self.robot.position),
            pedestrian_social_forces: forces.iter().map(|f| f.social.norm()).collect(),
            robot_social_force: robot_social.norm(),
        };

        Ok(Transition { observation: next, reward, breakdown, done: self.done, info })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    fn empty_scene(cfg: &EpisodeConfig) -> Scene {
        Scene::empty(cfg)
    }

    #[test]
    fn stop_action_times_out_at_step_100() {
        let cfg = EpisodeConfig::default();
        let mut env = CrowdEnv::from_scene(
            cfg.clone(),
            RewardConfig::default(),
            SfmParams::default(),
            empty_scene(&cfg),
        );
        let mut steps = 0;
        loop {
            let t = env.step(STOP).unwrap();
            steps += 1;
            if t.done.is_terminal() {
                assert_eq!(t.done, Done::Timeout);
                break;
            }
        }
        assert_eq!(steps, 100);
        assert!(matches!(env.step(STOP), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn collision_threshold() {
        let cfg = EpisodeConfig::default();
        let mut scene = empty_scene(&cfg);
        // pedestrian 0.5 m east of the robot, standing at its own goal; the
        // robot's repulsion pushes it 0.325 m away while the robot closes 0.25 m
        let p = scene.robot.position + Vec2::new(0.5, 0.0);
        scene.pedestrians.push(AgentState::at_rest(p, p, 0.3, 1.0, 0));
        scene.layout = GroupLayout::single_group(1);
        let mut env =
            CrowdEnv::from_scene(cfg, RewardConfig::default(), SfmParams::default(), scene);
        let t = env.step(index_of(4, 0)).unwrap();
        assert_eq!(t.done, Done::Collision);
        assert!((t.info.distances[0] - 0.575).abs() < 1e-12);
        assert_eq!(t.breakdown.collision, -0.25);
    }

    #[test]
    fn reset_is_deterministic() {
        let cfg = EpisodeConfig::default();
        let a = CrowdEnv::new(cfg.clone(), RewardConfig::default(), SfmParams::default(), &mut rng_for(9, &[1]))
            .unwrap()
            .observation();
        let b = CrowdEnv::new(cfg, RewardConfig::default(), SfmParams::default(), &mut rng_for(9, &[1]))
            .unwrap()
            .observation();
        assert_eq!(a, b);
    }

    #[test]
    fn reward_sums_breakdown() {
        let cfg = EpisodeConfig { n_pedestrians: 10, ..Default::default() };
        let mut rng = rng_for(4, &[]);
        let mut env =
            CrowdEnv::new(cfg, RewardConfig::default(), SfmParams::default(), &mut rng).unwrap();
        let mut t = env.step(index_of(4, 4)).unwrap();
        while !t.done.is_terminal() {
            assert!((t.reward - t.breakdown.total()).abs() <= 1e-12);
            t = env.step(index_of(2, 3)).unwrap();
        }
    }
}
