//! Circle-crossing scene generation.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::social_force::AgentState;

use super::{sample_groups, EpisodeConfig, GroupLayout, RobotState};

/// Cluster radius for small groups, and the furthest any member may start
/// from the circle (m).
pub const CLUSTER_RADIAL_SPREAD: f64 = 0.8;
/// Extra clearance required between any two agents at spawn time (m).
pub const SPAWN_CLEARANCE: f64 = 0.2;
const MAX_ROUNDS: usize = 1000;
const MEMBER_TRIES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub robot: RobotState,
    pub pedestrians: Vec<AgentState>,
    pub layout: GroupLayout,
}

impl Scene {
    /// The robot alone on its crossing: start `(0, -R)`, goal `(0, R)`.
    pub fn empty(cfg: &EpisodeConfig) -> Self {
        Self {
            robot: RobotState {
                position: Vec2::new(0.0, -cfg.circle_radius),
                velocity: Vec2::ZERO,
                radius: cfg.robot_radius,
                goal: Vec2::new(0.0, cfg.circle_radius),
                v_pref: cfg.v_pref,
                theta: FRAC_PI_2,
            },
            pedestrians: Vec::new(),
            layout: GroupLayout::single_group(0),
        }
    }
}

/// Draws a circle-crossing scene.
///
/// Each group gets a random anchor on the circle and its members are
/// scattered in a compact cluster around it (see [`cluster_radius`]), never
/// more than [`CLUSTER_RADIAL_SPREAD`] off the circle. The group heads for the
/// antipode of its anchor and every member keeps its offset, so the cluster
/// arrives in the formation it left in.
pub fn reset_scenario<R: Rng + ?Sized>(cfg: &EpisodeConfig, rng: &mut R) -> Result<Scene> {
    cfg.validate()?;
    let mut scene = Scene::empty(cfg);
    let layout = sample_groups(cfg.n_pedestrians, cfg.single_group, cfg.group_lambda, rng)?;
    let sizes = layout.group_sizes();

    let mut placed: Vec<(usize, Vec2, Vec2)> = Vec::with_capacity(cfg.n_pedestrians);
    for (group, &size) in sizes.iter().enumerate() {
        let members = place_group(cfg, size, &scene.robot, &placed, rng).ok_or_else(|| {
            Error::ScenarioGeneration(format!(
                "could not place group {group} of {size} after {MAX_ROUNDS} rounds"
            ))
        })?;
        placed.extend(members.into_iter().map(|(start, goal)| (group, start, goal)));
    }

    // Pedestrian i belongs to layout.group_of(i); hand out placed positions per group.
    let mut by_group: Vec<Vec<(Vec2, Vec2)>> = vec![Vec::new(); sizes.len()];
    for (g, start, goal) in placed {
        by_group[g].push((start, goal));
    }
    for list in &mut by_group {
        list.reverse();
    }
    scene.pedestrians = (0..cfg.n_pedestrians)
        .map(|i| {
            let g = layout.group_of(i);
            let (start, goal) = by_group[g].pop().expect("one placement per member");
            AgentState::at_rest(start, goal, cfg.ped_radius, cfg.v_pref, g)
        })
        .collect();
    scene.layout = layout;
    Ok(scene)
}

/// Radius of the disc a group of `size` is scattered in: 0.8 m up to three
/// members, widened for groups too large to fit at spawn clearance inside the
/// radial band.
pub fn cluster_radius(size: usize) -> f64 {
    if size <= 1 {
        return 0.0;
    }
    let n = size as f64;
    CLUSTER_RADIAL_SPREAD.max(0.45 * n.sqrt()).max(0.22 * n)
}

fn place_group<R: Rng + ?Sized>(
    cfg: &EpisodeConfig,
    size: usize,
    robot: &RobotState,
    placed: &[(usize, Vec2, Vec2)],
    rng: &mut R,
) -> Option<Vec<(Vec2, Vec2)>> {
    let min_gap = 2.0 * cfg.ped_radius + SPAWN_CLEARANCE;
    let robot_gap = cfg.ped_radius + robot.radius + SPAWN_CLEARANCE;
    let spread = cluster_radius(size);

    let clear = |p: Vec2, others: &[(Vec2, Vec2)]| {
        (p.norm() - cfg.circle_radius).abs() <= CLUSTER_RADIAL_SPREAD
            && p.distance(robot.position) > robot_gap
            && placed.iter().all(|(_, q, _)| p.distance(*q) > min_gap)
            && others.iter().all(|(q, _)| p.distance(*q) > min_gap)
    };

    for _ in 0..MAX_ROUNDS {
        let anchor = Vec2::from_polar(cfg.circle_radius, rng.gen_range(0.0..2.0 * PI));
        let mut members: Vec<(Vec2, Vec2)> = Vec::with_capacity(size);
        for _ in 0..size {
            let spot = (0..MEMBER_TRIES).find_map(|_| {
                // uniform over the disc
                let offset = Vec2::from_polar(spread * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
                let p = anchor + offset;
                clear(p, &members).then_some((p, offset - anchor))
            });
            match spot {
                Some(m) => members.push(m),
                None => break,
            }
        }
        if members.len() == size {
            return Some(members);
        }
    }
    None
}
