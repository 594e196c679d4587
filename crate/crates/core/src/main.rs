use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use groupnav::config::RunConfig;
use groupnav::env::log::{read_log, write_log, TrajectoryRecord};
use groupnav::eval::{
    compare_policies, compute_metrics, read_records, run_episode, run_evaluation, trial_env, write_records,
    GreedyPolicy, MetricsReport, ReportSettings, StraightLine, TrialRecord,
};
use groupnav::neural::{load_checkpoint, save_checkpoint};
use groupnav::plot::{learning_curve_svg, time_series_svg, trajectory_svg, TimeSeries};
use groupnav::ppo::{CurveRecord, Trainer};
use groupnav::{Error, Result};

#[derive(Parser)]
#[command(name = "groupnav", version, about = "Group-aware crowd navigation: simulate, train, evaluate, plot")]
struct Cli {
    /// Configuration file (`section.key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for training, scenarios and evaluation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `section.key=value`, applied after the config file. Repeatable.
    #[arg(long = "override", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy with PPO.
    Train {
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Evaluate a checkpoint over seeded trials.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Overrides eval.trials.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Dump one episode's trajectory log.
    Rollout {
        /// Greedy policy checkpoint; without it the robot drives straight at its goal.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Pooled t-tests between two evaluation directories.
    Compare(CompareArgs),
    /// Render an SVG figure.
    Plot(PlotArgs),
}

#[derive(Args)]
struct CompareArgs {
    /// Evaluation output directory of policy A.
    a: PathBuf,
    /// Evaluation output directory of policy B.
    b: PathBuf,
    #[arg(long, default_value = "A")]
    label_a: String,
    #[arg(long, default_value = "B")]
    label_b: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Trajectory,
    Distance,
    Velocity,
    LearningCurve,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(value_enum)]
    kind: PlotKind,
    /// `label=path` or `path`; a trajectory log, a directory of logs, or a learning curve.
    #[arg(required = true)]
    inputs: Vec<String>,
    /// Draw group hulls every this many steps (trajectory plots).
    #[arg(long, default_value_t = 4)]
    hull_every: usize,
    /// Moving-average window (learning curves).
    #[arg(long, default_value_t = 20)]
    smoothing: usize,
    /// Output file name inside the output directory.
    #[arg(long)]
    name: Option<String>,
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        for key in ["ppo.seed", "env.seed", "eval.seed"] {
            cfg.apply_override(&format!("{key}={seed}"))?;
        }
    }
    for o in &cli.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn write_jsonl<T: serde::Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| Error::MalformedLog {
                path: path.to_path_buf(),
                message: format!("line {}: {e}", n + 1),
            })
        })
        .collect()
}

fn cmd_train(cfg: &RunConfig, resume: Option<&Path>) -> Result<()> {
    let out = Path::new(&cfg.output.dir);
    let ckpt_dir = out.join("checkpoints");
    fs::create_dir_all(&ckpt_dir)?;
    fs::write(out.join("config.cfg"), cfg.to_text())?;

    let mut trainer = match resume {
        Some(path) => Trainer::resume(cfg.train_config(), &load_checkpoint(path)?)?,
        None => Trainer::new(cfg.train_config())?,
    };
    let curve_path = out.join("learning_curve.jsonl");
    let mut curve = if resume.is_some() && curve_path.exists() {
        let mut old: Vec<CurveRecord> = read_jsonl(&curve_path)?;
        old.retain(|r| r.iteration <= trainer.iteration());
        old
    } else {
        Vec::new()
    };
    let every = cfg.ppo.checkpoint_every;
    while !trainer.is_finished() {
        let rec = trainer.step()?;
        eprintln!(
            "iter {:>5}  reward {:>8}  succ {:>3} coll {:>3} timeout {:>3}  entropy {:.3}",
            rec.iteration,
            rec.mean_episode_reward.map_or("-".into(), |r| format!("{r:.3}")),
            rec.successes,
            rec.collisions,
            rec.timeouts,
            rec.entropy
        );
        curve.push(rec);
        if every > 0 && trainer.iteration() % every == 0 && !trainer.is_finished() {
            save_checkpoint(&ckpt_dir.join(format!("iter_{:06}.ckpt", trainer.iteration())), &trainer.checkpoint()?)?;
            write_jsonl(&curve_path, &curve)?;
        }
    }
    save_checkpoint(&out.join("final.ckpt"), &trainer.checkpoint()?)?;
    write_jsonl(&curve_path, &curve)?;
    println!("wrote {}", out.join("final.ckpt").display());
    Ok(())
}

fn cmd_eval(cfg: &RunConfig, checkpoint: &Path) -> Result<()> {
    let out = Path::new(&cfg.output.dir);
    fs::create_dir_all(out)?;
    let ckpt = load_checkpoint(checkpoint)?;
    let results = run_evaluation(&ckpt.params, &cfg.env, &cfg.reward, &cfg.sfm, &cfg.eval, cfg.output.trajectories)?;
    let (records, logs): (Vec<TrialRecord>, Vec<_>) = results.into_iter().unzip();
    let settings = ReportSettings::new(&cfg.env, &cfg.reward, &cfg.eval);
    let report = compute_metrics(&records, &settings)?;

    write_records(&out.join("records.jsonl"), &records)?;
    fs::write(out.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    let table = report.render(&checkpoint.display().to_string());
    fs::write(out.join("report.txt"), &table)?;
    if cfg.output.trajectories {
        let dir = out.join("trajectories");
        fs::create_dir_all(&dir)?;
        for (rec, log) in records.iter().zip(logs) {
            if let Some(log) = log {
                write_log(fs::File::create(dir.join(format!("trial_{:04}.jsonl", rec.trial)))?, &log)?;
            }
        }
    }
    fs::write(out.join("config.cfg"), cfg.to_text())?;
    print!("{table}");
    Ok(())
}

fn cmd_rollout(cfg: &RunConfig, checkpoint: Option<&Path>, trial: usize) -> Result<()> {
    let out = Path::new(&cfg.output.dir);
    fs::create_dir_all(out)?;
    let env = trial_env(&cfg.env, &cfg.reward, &cfg.sfm, cfg.eval.seed, trial)?;
    let (rec, log) = match checkpoint {
        Some(path) => {
            let ckpt = load_checkpoint(path)?;
            run_episode(env, &mut GreedyPolicy(&ckpt.params), trial, true)?
        }
        None => run_episode(env, &mut StraightLine, trial, true)?,
    };
    let path = out.join(format!("rollout_{trial:04}.jsonl"));
    write_log(fs::File::create(&path)?, &log.unwrap_or_default())?;
    println!(
        "trial {trial}: {} after {} steps, reward {:.4}; wrote {}",
        rec.outcome.as_str(),
        rec.steps,
        rec.total_reward,
        path.display()
    );
    Ok(())
}

fn load_eval_dir(dir: &Path) -> Result<(MetricsReport, Vec<TrialRecord>)> {
    let report: MetricsReport = serde_json::from_str(&fs::read_to_string(dir.join("report.json"))?)?;
    Ok((report, read_records(&dir.join("records.jsonl"))?))
}

fn cmd_compare(cfg: &RunConfig, args: &CompareArgs) -> Result<()> {
    let (ra, reca) = load_eval_dir(&args.a)?;
    let (rb, recb) = load_eval_dir(&args.b)?;
    let cmp = compare_policies(&args.label_a, &ra, &reca, &args.label_b, &rb, &recb)?;
    let out = Path::new(&cfg.output.dir);
    fs::create_dir_all(out)?;
    let table = cmp.render();
    fs::write(out.join("comparison.txt"), &table)?;
    fs::write(out.join("comparison.json"), serde_json::to_string_pretty(&cmp)? + "\n")?;
    print!("{table}");
    Ok(())
}

fn split_label(input: &str) -> (String, PathBuf) {
    match input.split_once('=') {
        Some((label, path)) => (label.to_string(), PathBuf::from(path)),
        None => {
            let p = PathBuf::from(input);
            let label = p.file_stem().map_or(input.to_string(), |s| s.to_string_lossy().into_owned());
            (label, p)
        }
    }
}

/// A single log, or every `*.jsonl` log in a directory (sorted by name).
fn load_logs(path: &Path) -> Result<Vec<Vec<TrajectoryRecord>>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::InvalidArgument(format!("no trajectory logs in {}", path.display())));
        }
        files.iter().map(|f| read_log(f)).collect()
    } else {
        Ok(vec![read_log(path)?])
    }
}

fn cmd_plot(cfg: &RunConfig, args: &PlotArgs) -> Result<()> {
    let inputs: Vec<(String, PathBuf)> = args.inputs.iter().map(|i| split_label(i)).collect();
    let (svg, default_name) = match args.kind {
        PlotKind::Trajectory => {
            let (label, path) = &inputs[0];
            let log = read_log(path)?;
            (trajectory_svg(&log, args.hull_every, label)?, "trajectory.svg")
        }
        PlotKind::Distance | PlotKind::Velocity => {
            let sets: Vec<(String, Vec<Vec<TrajectoryRecord>>)> =
                inputs.iter().map(|(l, p)| Ok((l.clone(), load_logs(p)?))).collect::<Result<_>>()?;
            let refs: Vec<(&str, &[Vec<TrajectoryRecord>])> =
                sets.iter().map(|(l, logs)| (l.as_str(), logs.as_slice())).collect();
            match args.kind {
                PlotKind::Distance => (time_series_svg(&refs, TimeSeries::Distance, cfg.env.dt)?, "distance.svg"),
                _ => (time_series_svg(&refs, TimeSeries::Velocity, cfg.env.dt)?, "velocity.svg"),
            }
        }
        PlotKind::LearningCurve => {
            let curves: Vec<(String, Vec<CurveRecord>)> =
                inputs.iter().map(|(l, p)| Ok((l.clone(), read_jsonl(p)?))).collect::<Result<_>>()?;
            let refs: Vec<(&str, &[CurveRecord])> = curves.iter().map(|(l, c)| (l.as_str(), c.as_slice())).collect();
            (learning_curve_svg(&refs, args.smoothing)?, "learning_curve.svg")
        }
    };
    let out = Path::new(&cfg.output.dir);
    fs::create_dir_all(out)?;
    let path = out.join(args.name.as_deref().unwrap_or(default_name));
    fs::write(&path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = resolve_config(cli)?;
    match &cli.command {
        Command::Train { resume } => cmd_train(&cfg, resume.as_deref()),
        Command::Eval { checkpoint, trials } => {
            if let Some(t) = trials {
                cfg.apply_override(&format!("eval.trials={t}"))?;
            }
            cmd_eval(&cfg, checkpoint)
        }
        Command::Rollout { checkpoint, trial } => cmd_rollout(&cfg, checkpoint.as_deref(), *trial),
        Command::Compare(args) => cmd_compare(&cfg, args),
        Command::Plot(args) => cmd_plot(&cfg, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
