//! Oracles and scenario helpers shared by the integration tests.
#![allow(dead_code)]

use groupnav::env::{CrowdEnv, Done, EpisodeConfig, RewardConfig, Scene};
use groupnav::eval::{run_episode, StraightLine, TrialRecord};
use groupnav::geometry::Vec2;
use groupnav::social_force::{self, AgentState, SfmParams};

/// Hull vertices by definition: a point is extreme unless it lies in a
/// closed triangle or on a closed segment spanned by other points.
pub fn brute_hull_vertices(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    let n = pts.len();
    let on_segment = |p: Vec2, a: Vec2, b: Vec2| {
        (b - a).cross(p - a) == 0.0 && (p - a).dot(p - b) <= 0.0
    };
    let in_triangle = |p: Vec2, a: Vec2, b: Vec2, c: Vec2| {
        let d1 = (b - a).cross(p - a);
        let d2 = (c - b).cross(p - b);
        let d3 = (a - c).cross(p - c);
        let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
        let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
        !(neg && pos)
    };
    let mut out = Vec::new();
    'outer: for i in 0..n {
        let others: Vec<Vec2> = (0..n).filter(|&j| j != i).map(|j| pts[j]).collect();
        for a in 0..others.len() {
            for b in a + 1..others.len() {
                if on_segment(pts[i], others[a], others[b]) {
                    continue 'outer;
                }
                for c in b + 1..others.len() {
                    let (x, y, z) = (others[a], others[b], others[c]);
                    if (y - x).cross(z - x) != 0.0 && in_triangle(pts[i], x, y, z) {
                        continue 'outer;
                    }
                }
            }
        }
        out.push(pts[i]);
    }
    out
}

/// Advantages from the definition: sum of (gamma lambda)^k delta_{t+k},
/// truncated at the first terminal step.
pub fn brute_gae(rewards: &[f64], values: &[f64], dones: &[bool], bootstrap: f64, gamma: f64, lambda: f64) -> Vec<f64> {
    let n = rewards.len();
    let next_value = |t: usize| if t + 1 < n { values[t + 1] } else { bootstrap };
    (0..n)
        .map(|t| {
            let mut sum = 0.0;
            for k in t..n {
                let live = if dones[k] { 0.0 } else { 1.0 };
                let delta = rewards[k] + gamma * next_value(k) * live - values[k];
                sum += (gamma * lambda).powi((k - t) as i32) * delta;
                if dones[k] {
                    break;
                }
            }
            sum
        })
        .collect()
}

/// Discounted return minus baseline, i.e. GAE with lambda = 1.
pub fn brute_discounted(rewards: &[f64], values: &[f64], dones: &[bool], bootstrap: f64, gamma: f64) -> Vec<f64> {
    let n = rewards.len();
    (0..n)
        .map(|t| {
            let mut g = 0.0;
            let mut disc = 1.0;
            let mut terminal = false;
            for k in t..n {
                g += disc * rewards[k];
                disc *= gamma;
                if dones[k] {
                    terminal = true;
                    break;
                }
            }
            if !terminal {
                g += disc * bootstrap;
            }
            g - values[t]
        })
        .collect()
}

/// Pooled t statistic and degrees of freedom straight from the textbook formula.
pub fn pooled_t_oracle(a: &[f64], b: &[f64]) -> (f64, usize) {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let m1 = a.iter().sum::<f64>() / n1;
    let m2 = b.iter().sum::<f64>() / n2;
    let v1 = a.iter().map(|x| (x - m1).powi(2)).sum::<f64>() / (n1 - 1.0);
    let v2 = b.iter().map(|x| (x - m2).powi(2)).sum::<f64>() / (n2 - 1.0);
    let sp2 = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0);
    ((m1 - m2) / (sp2 * (1.0 / n1 + 1.0 / n2)).sqrt(), a.len() + b.len() - 2)
}

/// Two-tailed p from an independent Student's t implementation.
pub fn p_oracle(t: f64, df: usize) -> f64 {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let dist = StudentsT::new(0.0, 1.0, df as f64).unwrap();
    2.0 * dist.cdf(-t.abs())
}

pub fn walker(x: f64, y: f64, gx: f64, gy: f64, group: usize) -> AgentState {
    AgentState::at_rest(Vec2::new(x, y), Vec2::new(gx, gy), 0.3, 1.0, group)
}

/// Runs pedestrians (no robot) until all are within 0.3 m of their goals or
/// `max_steps` pass. Returns every state including the initial one.
pub fn simulate(mut agents: Vec<AgentState>, max_steps: usize) -> Vec<Vec<AgentState>> {
    let params = SfmParams::default();
    let mut history = vec![agents.clone()];
    for _ in 0..max_steps {
        agents = social_force::step(&agents, None, &[], &params, 0.25);
        history.push(agents.clone());
        if agents.iter().all(|a| a.position.distance(a.goal) < params.goal_stop_distance) {
            break;
        }
    }
    history
}

/// Two pedestrians walking straight at each other, 0.1 m laterally offset
/// (an exactly collinear pair is a symmetric equilibrium). Returns
/// (minimum centre distance, both arrived).
pub fn head_on_pair() -> (f64, bool) {
    let h = simulate(vec![walker(-4.0, 0.05, 4.0, 0.05, 0), walker(4.0, -0.05, -4.0, -0.05, 1)], 200);
    let min_d = h.iter().map(|s| s[0].position.distance(s[1].position)).fold(f64::INFINITY, f64::min);
    let last = h.last().unwrap();
    (min_d, last.iter().all(|a| a.position.distance(a.goal) < 0.5))
}

/// Three group members crossing 8 m side by side. Returns (max pairwise
/// distance over the transit, distance travelled by the centroid).
pub fn group_transit() -> (f64, f64) {
    let start = [(-4.0, -0.5), (-4.3, 0.0), (-4.0, 0.5)];
    let agents = start.iter().map(|&(x, y)| walker(x, y, x + 8.0, y, 0)).collect();
    let h = simulate(agents, 200);
    let centroid = |s: &[AgentState]| s.iter().map(|a| a.position).sum::<Vec2>() / s.len() as f64;
    let mut max_pair: f64 = 0.0;
    for s in &h {
        for i in 0..3 {
            for j in i + 1..3 {
                max_pair = max_pair.max(s[i].position.distance(s[j].position));
            }
        }
    }
    (max_pair, centroid(h.last().unwrap()).distance(centroid(&h[0])))
}

/// Largest speed / v_pref ratio seen in a dense multi-group crossing.
pub fn worst_speed_ratio(seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let agents: Vec<AgentState> = (0..10)
        .map(|i| {
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let p = Vec2::from_polar(4.0, a);
            let mut s = AgentState::at_rest(p, -p, 0.3, rng.gen_range(0.5..1.5), i % 3);
            s.velocity = Vec2::from_polar(rng.gen_range(0.0..2.0), rng.gen_range(0.0..6.3));
            s
        })
        .collect();
    let robot = walker(0.0, -4.0, 0.0, 4.0, usize::MAX);
    let params = SfmParams::default();
    let mut worst: f64 = 0.0;
    let mut state = agents;
    for _ in 0..100 {
        state = social_force::step(&state, Some(&robot), &[], &params, 0.25);
        for a in &state {
            worst = worst.max(a.velocity.norm() / a.v_pref);
        }
    }
    worst
}

/// Straight-line full-speed run through an empty scene.
pub fn empty_scene_run() -> (TrialRecord, Done) {
    let cfg = EpisodeConfig::default();
    let env = CrowdEnv::from_scene(cfg.clone(), RewardConfig::default(), SfmParams::default(), Scene::empty(&cfg));
    let (rec, _) = run_episode(env, &mut StraightLine, 0, false).unwrap();
    let outcome = rec.outcome;
    (rec, outcome)
}

pub fn random_obs<R: rand::Rng>(rng: &mut R, n: usize) -> groupnav::env::Observation {
    use groupnav::env::{Observation, PedestrianObs, RobotState};
    let mut v = || Vec2::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
    let robot = RobotState { position: v(), velocity: v() * 0.25, radius: 0.3, goal: v(), v_pref: 1.0, theta: 0.7 };
    let pedestrians = (0..n).map(|_| PedestrianObs { position: v(), velocity: v() * 0.25, radius: 0.3 }).collect();
    Observation { robot, pedestrians }
}

/// Central differences of `logits . gl + value * gv` against the analytic
/// gradient on 100 coordinates covering every layer. Returns the worst
/// relative error.
pub fn gradient_check(seed: u64) -> f64 {
    use groupnav::env::NUM_ACTIONS;
    use groupnav::neural::{backward, forward, init_params, PolicyParams, LAYERS};
    use rand::Rng;

    let mut rng = groupnav::rng::rng_for(seed, &[]);
    let params = init_params(&mut rng);
    let obs = random_obs(&mut rng, 4);
    let gl: Vec<f64> = (0..NUM_ACTIONS).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let gv = 0.8;
    let objective = |p: &PolicyParams| {
        let t = forward(p, &obs).unwrap();
        t.logits.iter().zip(&gl).map(|(a, b)| a * b).sum::<f64>() + t.value * gv
    };
    let analytic = backward(&params, &forward(&params, &obs).unwrap(), &gl, gv).unwrap();

    let n = params.as_slice().len();
    let mut coords: Vec<usize> = Vec::new();
    let mut offset = 0;
    for l in LAYERS {
        let w = l.inputs * l.outputs;
        for _ in 0..6 {
            coords.push(offset + rng.gen_range(0..w));
        }
        coords.push(offset + w + rng.gen_range(0..l.outputs));
        offset += w + l.outputs;
    }
    while coords.len() < 100 {
        coords.push(rng.gen_range(0..n));
    }

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for &c in &coords {
        let mut plus = params.clone();
        plus.as_mut_slice()[c] += h;
        let mut minus = params.clone();
        minus.as_mut_slice()[c] -= h;
        let numeric = (objective(&plus) - objective(&minus)) / (2.0 * h);
        let a = analytic.as_slice()[c];
        worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
    }
    worst
}

/// Robot-to-hull distance without building a hull: zero inside any member
/// triangle, otherwise the distance to the nearest member-pair segment.
pub fn hull_distance_oracle(p: Vec2, members: &[Vec2]) -> f64 {
    let seg = |a: Vec2, b: Vec2| groupnav::geometry::Segment::new(a, b).distance(p);
    let n = members.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (members[i], members[j], members[k]);
                let d1 = (b - a).cross(p - a);
                let d2 = (c - b).cross(p - b);
                let d3 = (a - c).cross(p - c);
                let all_pos = d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0;
                let all_neg = d1 <= 0.0 && d2 <= 0.0 && d3 <= 0.0;
                if all_pos || all_neg {
                    return 0.0;
                }
            }
        }
    }
    let mut best = members.iter().map(|m| m.distance(p)).fold(f64::INFINITY, f64::min);
    for i in 0..n {
        for j in i + 1..n {
            best = best.min(seg(members[i], members[j]));
        }
    }
    best
}

/// The reward written out term by term.
pub fn reward_oracle(
    prev: &groupnav::env::Observation,
    next: &groupnav::env::Observation,
    assignment: &[usize],
    cfg: &RewardConfig,
) -> f64 {
    let goal_dist = |o: &groupnav::env::Observation| o.robot.position.distance(o.robot.goal);
    let mut r = cfg.c_prog * (goal_dist(prev) - goal_dist(next));
    if goal_dist(next) < cfg.d_coll {
        r += cfg.c_goal;
    }
    let robot = next.robot.position;
    for p in &next.pedestrians {
        let d = p.position.distance(robot);
        if d < cfg.d_coll {
            r -= cfg.c_coll;
        } else if d <= cfg.d_disc {
            r -= cfg.c_disc * (cfg.d_disc - d);
        }
    }
    if cfg.group_term_enabled {
        let groups = assignment.iter().copied().max().map_or(0, |g| g + 1);
        for g in 0..groups {
            let members: Vec<Vec2> = next
                .pedestrians
                .iter()
                .zip(assignment)
                .filter(|(_, &a)| a == g)
                .map(|(p, _)| p.position)
                .collect();
            if members.len() >= 2 && hull_distance_oracle(robot, &members) < cfg.d_coll {
                r -= cfg.c_group;
            }
        }
    }
    r
}
