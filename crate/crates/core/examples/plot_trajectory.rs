//! Writes a trajectory SVG and a distance-over-time SVG for a straight-line robot.
use groupnav::env::{EpisodeConfig, RewardConfig};
use groupnav::eval::{run_episode, trial_env, StraightLine};
use groupnav::plot::{time_series_svg, trajectory_svg, TimeSeries};
use groupnav::social_force::SfmParams;

fn main() -> groupnav::Result<()> {
    let cfg = EpisodeConfig { n_pedestrians: 6, ..EpisodeConfig::default() };
    let mut logs = Vec::new();
    for trial in 0..8 {
        let env = trial_env(&cfg, &RewardConfig::default(), &SfmParams::default(), 0, trial)?;
        let (_, log) = run_episode(env, &mut StraightLine, trial, true)?;
        logs.push(log.unwrap());
    }
    let dir = std::env::temp_dir();
    let a = dir.join("groupnav_trajectory.svg");
    std::fs::write(&a, trajectory_svg(&logs[0], 4, "straight line, trial 0")?)?;
    let b = dir.join("groupnav_distance.svg");
    std::fs::write(&b, time_series_svg(&[("straight line", &logs)], TimeSeries::Distance, cfg.dt)?)?;
    println!("wrote {} and {}", a.display(), b.display());
    Ok(())
}
