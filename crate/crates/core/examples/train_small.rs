//! A short PPO run. Pass the iteration count as the first argument (default 30).
//!
//!     cargo run --release --example train_small -- 200
use groupnav::ppo::{train, TrainConfig};

fn main() -> groupnav::Result<()> {
    let iterations = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30);
    let mut cfg = TrainConfig::default();
    cfg.ppo.iterations = iterations;
    cfg.env.single_group = true;
    let out = train(cfg, |_, _| Ok(()), |r| {
        if r.iteration % 10 == 0 {
            let mean = r.mean_episode_reward.map_or("-".to_string(), |m| format!("{m:.3}"));
            println!(
                "iter {:4}  episodes {:3}  mean reward {mean:>7}  success {:3}  collision {:3}  entropy {:.3}",
                r.iteration, r.episodes, r.successes, r.collisions, r.entropy
            );
        }
    })?;
    println!("final parameter norm {:.3}", out.params.norm());
    Ok(())
}
