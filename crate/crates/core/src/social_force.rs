//! Extended social force model with group cohesion terms.
//!
//! Each pedestrian accelerates according to a goal-seeking term, exponential
//! repulsion from walls and other agents (the robot included), and three group
//! terms: attraction towards the group centroid, short-range repulsion between
//! members, and a gaze term that slows an agent whose group centroid falls
//! outside its field of view. Agents have unit mass, so forces are accelerations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_between, Segment, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfmParams {
    /// Relaxation time towards the desired velocity (s).
    pub tau: f64,
    /// Agent-agent repulsion strength (m/s²).
    pub social_strength: f64,
    /// Agent-agent repulsion range (m).
    pub social_range: f64,
    pub obstacle_strength: f64,
    pub obstacle_range: f64,
    pub gaze_strength: f64,
    pub attraction_strength: f64,
    pub group_repulsion_strength: f64,
    /// Half-angle of the vision field used by the gaze term (degrees).
    pub vision_half_angle: f64,
    /// Attraction switches on beyond `coeff * (group size - 1)` metres from the centroid.
    pub attraction_threshold_coeff: f64,
    pub group_repulsion_radius: f64,
    /// Speeds are capped at `max_speed_factor * v_pref`.
    pub max_speed_factor: f64,
    /// Agents closer than this to their goal brake and hold position.
    pub goal_stop_distance: f64,
}

impl Default for SfmParams {
    fn default() -> Self {
        Self {
            tau: 0.5,
            social_strength: 4.5,
            social_range: 0.35,
            obstacle_strength: 10.0,
            obstacle_range: 0.2,
            gaze_strength: 4.0,
            attraction_strength: 3.0,
            group_repulsion_strength: 1.0,
            vision_half_angle: 90.0,
            attraction_threshold_coeff: 0.5,
            group_repulsion_radius: 0.6,
            max_speed_factor: 1.3,
            goal_stop_distance: 0.3,
        }
    }
}

impl SfmParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau", self.tau),
            ("social_strength", self.social_strength),
            ("social_range", self.social_range),
            ("obstacle_strength", self.obstacle_strength),
            ("obstacle_range", self.obstacle_range),
            ("gaze_strength", self.gaze_strength),
            ("attraction_strength", self.attraction_strength),
            ("group_repulsion_strength", self.group_repulsion_strength),
            ("vision_half_angle", self.vision_half_angle),
            ("attraction_threshold_coeff", self.attraction_threshold_coeff),
            ("group_repulsion_radius", self.group_repulsion_radius),
            ("max_speed_factor", self.max_speed_factor),
            ("goal_stop_distance", self.goal_stop_distance),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidArgument(format!("sfm.{name} must be positive, got {value}")));
            }
        }
        if self.vision_half_angle >= 180.0 {
            return Err(Error::InvalidArgument("sfm.vision_half_angle must lie in (0, 180)".into()));
        }
        Ok(())
    }
}

/// Full simulator-side state of a pedestrian. Only position, velocity and
/// radius are observable by the robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub goal: Vec2,
    pub v_pref: f64,
    pub group_id: usize,
}

impl AgentState {
    pub fn at_rest(position: Vec2, goal: Vec2, radius: f64, v_pref: f64, group_id: usize) -> Self {
        Self { position, velocity: Vec2::ZERO, radius, goal, v_pref, group_id }
    }

    fn goal_direction(&self) -> Option<Vec2> {
        (self.goal - self.position).normalized()
    }
}

/// Relaxation towards `v_pref` along the goal direction; pure braking at the goal.
pub fn desired_force(agent: &AgentState, params: &SfmParams) -> Vec2 {
    let desired = agent.goal_direction().map_or(Vec2::ZERO, |dir| dir * agent.v_pref);
    (desired - agent.velocity) / params.tau
}

fn braking_force(agent: &AgentState, params: &SfmParams) -> Vec2 {
    -agent.velocity / params.tau
}

/// Exponential repulsion exerted by `other` on `agent`.
pub fn social_repulsion(agent: &AgentState, other: &AgentState, params: &SfmParams) -> Vec2 {
    repulsion_between(agent.position, agent.radius, other.position, other.radius, params)
}

/// Same as [`social_repulsion`] but on bare positions and radii.
pub fn repulsion_between(
    position: Vec2,
    radius: f64,
    other_position: Vec2,
    other_radius: f64,
    params: &SfmParams,
) -> Vec2 {
    let diff = position - other_position;
    let distance = diff.norm();
    let normal = diff.normalized().unwrap_or(Vec2::new(1.0, 0.0));
    let magnitude =
        params.social_strength * ((radius + other_radius - distance) / params.social_range).exp();
    normal * magnitude
}

pub fn obstacle_force(agent: &AgentState, obstacles: &[Segment], params: &SfmParams) -> Vec2 {
    obstacles
        .iter()
        .map(|wall| {
            let diff = agent.position - wall.closest_point(agent.position);
            let distance = diff.norm();
            let normal = diff.normalized().unwrap_or(Vec2::new(1.0, 0.0));
            normal
                * (params.obstacle_strength
                    * ((agent.radius - distance) / params.obstacle_range).exp())
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroupForces {
    pub gaze: Vec2,
    pub attraction: Vec2,
    pub repulsion: Vec2,
}

impl GroupForces {
    pub fn total(&self) -> Vec2 {
        self.gaze + self.attraction + self.repulsion
    }
}

/// Group terms for `agent`. `members` are its co-members, excluding itself.
pub fn group_forces(agent: &AgentState, members: &[&AgentState], params: &SfmParams) -> GroupForces {
    if members.is_empty() {
        return GroupForces::default();
    }
    let n = members.len() + 1;
    let centroid =
        (agent.position + members.iter().map(|m| m.position).sum::<Vec2>()) / n as f64;
    let to_centroid = centroid - agent.position;

    let gaze = match agent.goal_direction() {
        Some(desired_dir) => {
            let theta = angle_between(desired_dir, to_centroid);
            let excess = (theta - params.vision_half_angle).max(0.0);
            desired_dir * (-params.gaze_strength * excess / 90.0)
        }
        None => Vec2::ZERO,
    };

    let threshold = params.attraction_threshold_coeff * (n - 1) as f64;
    let attraction = match to_centroid.normalized() {
        Some(dir) if to_centroid.norm() > threshold => dir * params.attraction_strength,
        _ => Vec2::ZERO,
    };

    let repulsion = members
        .iter()
        .filter(|m| agent.position.distance(m.position) < params.group_repulsion_radius)
        .map(|m| (agent.position - m.position).normalized().unwrap_or(Vec2::new(1.0, 0.0)))
        .sum::<Vec2>()
        * params.group_repulsion_strength;

    GroupForces { gaze, attraction, repulsion }
}

/// Resultant force on each term, kept separate for diagnostics and metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForceBreakdown {
    pub desired: Vec2,
    pub obstacle: Vec2,
    /// Sum of agent-agent repulsion, robot included.
    pub social: Vec2,
    pub group: GroupForces,
}

impl ForceBreakdown {
    pub fn total(&self) -> Vec2 {
        self.desired + self.obstacle + self.social + self.group.total()
    }
}

/// All force terms acting on `agents[index]`.
pub fn force_breakdown(
    index: usize,
    agents: &[AgentState],
    robot: Option<&AgentState>,
    obstacles: &[Segment],
    params: &SfmParams,
) -> ForceBreakdown {
    let agent = &agents[index];
    let desired = if agent.position.distance(agent.goal) < params.goal_stop_distance {
        braking_force(agent, params)
    } else {
        desired_force(agent, params)
    };
    let obstacle = obstacle_force(agent, obstacles, params);

    let mut social = Vec2::ZERO;
    for (j, other) in agents.iter().enumerate() {
        if j != index {
            social += social_repulsion(agent, other, params);
        }
    }
    if let Some(robot) = robot {
        social += social_repulsion(agent, robot, params);
    }

    let members: Vec<&AgentState> = agents
        .iter()
        .enumerate()
        .filter(|&(j, other)| j != index && other.group_id == agent.group_id)
        .map(|(_, other)| other)
        .collect();
    let group = group_forces(agent, &members, params);

    ForceBreakdown { desired, obstacle, social, group }
}

pub fn total_force(
    index: usize,
    agents: &[AgentState],
    robot: Option<&AgentState>,
    obstacles: &[Segment],
    params: &SfmParams,
) -> Vec2 {
    force_breakdown(index, agents, robot, obstacles, params).total()
}

/// Advances every agent by `dt` with semi-implicit Euler. Forces are computed
/// from the pre-step snapshot.
pub fn step(
    agents: &[AgentState],
    robot: Option<&AgentState>,
    obstacles: &[Segment],
    params: &SfmParams,
    dt: f64,
) -> Vec<AgentState> {
    debug_assert!(dt > 0.0);
    (0..agents.len())
        .map(|i| {
            let force = total_force(i, agents, robot, obstacles, params);
            integrate(&agents[i], force, params, dt)
        })
        .collect()
}

/// One semi-implicit Euler update under a known force.
pub fn integrate(agent: &AgentState, force: Vec2, params: &SfmParams, dt: f64) -> AgentState {
    let velocity = (agent.velocity + force * dt).clamp_norm(params.max_speed_factor * agent.v_pref);
    AgentState { position: agent.position + velocity * dt, velocity, ..agent.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(x: f64, y: f64) -> AgentState {
        AgentState::at_rest(Vec2::new(x, y), Vec2::new(x, y), 0.3, 1.0, 0)
    }

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn desired_force_cases() {
        let p = SfmParams::default();
        let mut a = AgentState::at_rest(Vec2::ZERO, Vec2::new(4.0, 0.0), 0.3, 1.0, 0);
        assert_eq!(desired_force(&a, &p), Vec2::new(2.0, 0.0));

        a.goal = a.position;
        a.velocity = Vec2::new(1.0, 0.0);
        assert_eq!(desired_force(&a, &p), Vec2::new(-2.0, 0.0));

        a.goal = Vec2::new(4.0, 0.0);
        assert_eq!(desired_force(&a, &p), Vec2::ZERO);
    }

    #[test]
    fn social_repulsion_magnitudes() {
        let p = SfmParams::default();
        let a = agent(0.0, 0.0);
        let b = agent(0.6, 0.0);
        let f = social_repulsion(&a, &b, &p);
        assert!(close(f, Vec2::new(-p.social_strength, 0.0), 1e-12));

        let c = agent(0.6 + p.social_range, 0.0);
        let f = social_repulsion(&a, &c, &p);
        assert!((f.norm() - p.social_strength / std::f64::consts::E).abs() < 1e-12);

        let mut last = f64::INFINITY;
        for d in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let m = social_repulsion(&a, &agent(d, 0.0), &p).norm();
            assert!(m < last);
            last = m;
        }
        assert!(last < 1e-15);
    }

    #[test]
    fn coincident_agents_use_fallback_direction() {
        let p = SfmParams::default();
        let f = social_repulsion(&agent(1.0, 1.0), &agent(1.0, 1.0), &p);
        let expected = p.social_strength * (0.6 / p.social_range).exp();
        assert_eq!(f, Vec2::new(expected, 0.0));
    }

    #[test]
    fn obstacle_cases() {
        let p = SfmParams::default();
        let a = agent(0.0, 0.3);
        assert_eq!(obstacle_force(&a, &[], &p), Vec2::ZERO);

        let wall = Segment::new(Vec2::new(-5.0, 0.0), Vec2::new(5.0, 0.0));
        let f = obstacle_force(&a, &[wall], &p);
        assert!(close(f, Vec2::new(0.0, p.obstacle_strength), 1e-12));

        let far = agent(0.0, 20.0);
        assert!(obstacle_force(&far, &[wall], &p).norm() < 1e-30);
    }

    #[test]
    fn group_force_cases() {
        let p = SfmParams::default();
        let lone = agent(0.0, 0.0);
        assert_eq!(group_forces(&lone, &[], &p), GroupForces::default());

        // co-member straight ahead: no gaze correction
        let mut a = AgentState::at_rest(Vec2::ZERO, Vec2::new(10.0, 0.0), 0.3, 1.0, 0);
        let ahead = agent(3.0, 0.0);
        let g = group_forces(&a, &[&ahead], &p);
        assert_eq!(g.gaze, Vec2::ZERO);
        // centroid 1.5 m away > 0.5 * (2 - 1) m: attraction of magnitude beta2 towards the partner
        assert!(close(g.attraction, Vec2::new(p.attraction_strength, 0.0), 1e-12));
        assert_eq!(g.repulsion, Vec2::ZERO);

        // partner behind: centroid at 180 degrees, gaze slows the agent
        a.goal = Vec2::new(-10.0, 0.0);
        let g = group_forces(&a, &[&ahead], &p);
        assert!(close(g.gaze, Vec2::new(p.gaze_strength, 0.0), 1e-12));

        // partner within the personal radius
        let near = agent(0.4, 0.0);
        let g = group_forces(&a, &[&near], &p);
        assert!(close(g.repulsion, Vec2::new(-p.group_repulsion_strength, 0.0), 1e-12));
        assert_eq!(g.attraction, Vec2::ZERO);
    }

    #[test]
    fn total_force_trivial_cases() {
        let p = SfmParams::default();
        let at_goal = vec![agent(1.0, 1.0)];
        assert_eq!(total_force(0, &at_goal, None, &[], &p), Vec2::ZERO);

        let far = vec![AgentState::at_rest(Vec2::ZERO, Vec2::new(5.0, 0.0), 0.3, 1.0, 0)];
        assert_eq!(total_force(0, &far, None, &[], &p), desired_force(&far[0], &p));
    }

    #[test]
    fn head_on_pair_matches_termwise_sum() {
        let p = SfmParams::default();
        let agents = vec![
            AgentState::at_rest(Vec2::new(-1.0, 0.0), Vec2::new(4.0, 0.0), 0.3, 1.0, 0),
            AgentState::at_rest(Vec2::new(1.0, 0.0), Vec2::new(-4.0, 0.0), 0.3, 1.0, 1),
        ];
        // hand: desired = (1,0)/0.5 = (2,0); social = 4.5 exp((0.6-2)/0.35) pointing -x
        let social = 4.5 * ((0.6f64 - 2.0) / 0.35).exp();
        let expected = Vec2::new(2.0 - social, 0.0);
        assert!(close(total_force(0, &agents, None, &[], &p), expected, 1e-12));
        assert!(close(total_force(1, &agents, None, &[], &p), -expected, 1e-12));
    }

    #[test]
    fn integration_cases() {
        let p = SfmParams::default();
        let mut a = agent(0.0, 0.0);
        a.goal = Vec2::new(10.0, 0.0);
        let out = integrate(&a, Vec2::new(2.0, 0.0), &p, 0.25);
        assert_eq!(out.velocity, Vec2::new(0.5, 0.0));
        assert_eq!(out.position, Vec2::new(0.125, 0.0));

        a.velocity = Vec2::new(0.3, -0.2);
        let out = integrate(&a, Vec2::ZERO, &p, 0.25);
        assert_eq!(out.position, a.velocity * 0.25);

        let out = integrate(&a, Vec2::new(100.0, 40.0), &p, 0.25);
        assert!((out.velocity.norm() - 1.3).abs() < 1e-12);
    }

    #[test]
    fn braking_inside_goal_stop_radius() {
        let p = SfmParams::default();
        let mut a = AgentState::at_rest(Vec2::ZERO, Vec2::new(0.2, 0.0), 0.3, 1.0, 0);
        a.velocity = Vec2::new(0.5, 0.0);
        assert_eq!(total_force(0, &[a.clone()], None, &[], &p), Vec2::new(-1.0, 0.0));
    }
}
