//! Drives the robot straight at its goal and prints the reward terms per step.
use groupnav::env::{CrowdEnv, EpisodeConfig, RewardConfig};
use groupnav::eval::{run_episode, StraightLine};
use groupnav::rng::rng_for;
use groupnav::social_force::SfmParams;

fn main() -> groupnav::Result<()> {
    let cfg = EpisodeConfig { n_pedestrians: 6, ..EpisodeConfig::default() };
    let env = CrowdEnv::new(cfg, RewardConfig::default(), SfmParams::default(), &mut rng_for(7, &[]))?;
    println!("groups: {:?}", env.layout().group_sizes());
    let (rec, log) = run_episode(env, &mut StraightLine, 0, true)?;
    for r in log.unwrap().iter().skip(1) {
        let b = &r.reward;
        println!(
            "step {:3}  progress {:+.3}  discomfort {:+.3}  group {:+.3}  collision {:+.3}  goal {:+.3}",
            r.step, b.progress, b.discomfort, b.group, b.collision, b.goal
        );
    }
    println!("{} after {} steps, return {:.3}", rec.outcome.as_str(), rec.steps, rec.total_reward);
    Ok(())
}
