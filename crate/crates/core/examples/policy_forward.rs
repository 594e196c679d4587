//! One forward pass of a freshly initialised policy.
use groupnav::env::{action_from_index, CrowdEnv, EpisodeConfig, RewardConfig};
use groupnav::neural::{forward, init_params, param_count};
use groupnav::rng::rng_for;
use groupnav::social_force::SfmParams;

fn main() -> groupnav::Result<()> {
    let params = init_params(&mut rng_for(0, &[1]));
    println!("{} parameters", param_count());
    let env = CrowdEnv::new(EpisodeConfig::default(), RewardConfig::default(), SfmParams::default(), &mut rng_for(0, &[2]))?;
    let trace = forward(&params, &env.observation())?;
    println!("value estimate {:.4}", trace.value);
    for (i, a) in trace.attention.iter().enumerate() {
        println!("attention on pedestrian {i}: {a:.3}");
    }
    let best = trace.greedy_action();
    let v = action_from_index(best)?;
    println!("greedy action {best} -> velocity ({:.2}, {:.2}), p = {:.4}", v.x, v.y, trace.policy[best]);
    println!("policy entropy {:.3} (uniform would be {:.3})", trace.entropy(), (81f64).ln());
    Ok(())
}
