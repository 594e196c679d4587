//! Two groups crossing with the plain social force model, no robot.
use groupnav::geometry::Vec2;
use groupnav::social_force::{step, AgentState, SfmParams};

fn main() {
    let params = SfmParams::default();
    let mut agents = Vec::new();
    for i in 0..3 {
        let dy = 0.7 * i as f64 - 0.7;
        agents.push(AgentState::at_rest(Vec2::new(-4.0, dy), Vec2::new(4.0, dy), 0.3, 1.0, 0));
        agents.push(AgentState::at_rest(Vec2::new(dy, -4.0), Vec2::new(dy, 4.0), 0.3, 1.0, 1));
    }
    let mut closest = f64::INFINITY;
    for t in 0..60 {
        agents = step(&agents, None, &[], &params, 0.25);
        for (i, a) in agents.iter().enumerate() {
            for b in &agents[i + 1..] {
                closest = closest.min(a.position.distance(b.position));
            }
        }
        if t % 10 == 9 {
            let xs: Vec<String> = agents.iter().map(|a| format!("({:5.2},{:5.2})", a.position.x, a.position.y)).collect();
            println!("t={:5.2}s {}", (t + 1) as f64 * 0.25, xs.join(" "));
        }
    }
    println!("closest centre distance {closest:.3} m");
}
