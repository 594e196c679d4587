//! Evaluates two untrained policies on the same trials and compares them.
use groupnav::env::{EpisodeConfig, RewardConfig};
use groupnav::eval::{compare_policies, compute_metrics, run_evaluation, EvalConfig, ReportSettings};
use groupnav::neural::init_params;
use groupnav::rng::rng_for;
use groupnav::social_force::SfmParams;

fn main() -> groupnav::Result<()> {
    let env = EpisodeConfig::default();
    let reward = RewardConfig::default();
    let cfg = EvalConfig { trials: 40, ..EvalConfig::default() };
    let settings = ReportSettings::new(&env, &reward, &cfg);
    let mut runs = Vec::new();
    for seed in [1, 2] {
        let params = init_params(&mut rng_for(seed, &[]));
        let records: Vec<_> = run_evaluation(&params, &env, &reward, &SfmParams::default(), &cfg, false)?
            .into_iter()
            .map(|(r, _)| r)
            .collect();
        let report = compute_metrics(&records, &settings)?;
        println!("{}", report.render(&format!("init seed {seed}")));
        runs.push((report, records));
    }
    let cmp = compare_policies("seed 1", &runs[0].0, &runs[0].1, "seed 2", &runs[1].0, &runs[1].1)?;
    println!("{}", cmp.render());
    Ok(())
}
