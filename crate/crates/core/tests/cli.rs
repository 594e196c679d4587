use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn groupnav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_groupnav")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = groupnav(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_eval_compare_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# tiny run\nppo.windows_per_batch = 4\nenv.single_group = true\neval.trials = 5\n").unwrap();
    let train = |dir: &str| {
        let out = tmp.path().join(dir);
        ok(&["train", "--config", s(&cfg), "--override", "ppo.iterations=10", "--seed", "3", "--out", s(&out)]);
        out
    };
    let t1 = train("t1");
    let t2 = train("t2");
    assert!(t1.join("final.ckpt").exists());
    assert_eq!(fs::read_dir(t1.join("checkpoints")).unwrap().count(), 0);
    let curve = fs::read_to_string(t1.join("learning_curve.jsonl")).unwrap();
    assert_eq!(curve.lines().count(), 10);
    assert_eq!(curve, fs::read_to_string(t2.join("learning_curve.jsonl")).unwrap());
    let resolved = fs::read_to_string(t1.join("config.cfg")).unwrap();
    assert!(resolved.contains("ppo.iterations = 10\n"));
    assert!(resolved.contains("ppo.seed = 3"));
    assert!(resolved.contains("# derived default"));

    let ckpt = t1.join("final.ckpt");
    let eval = |dir: &str| {
        let out = tmp.path().join(dir);
        ok(&["eval", "--config", s(&cfg), "--checkpoint", s(&ckpt), "--out", s(&out)]);
        out
    };
    let e1 = eval("e1");
    let e2 = eval("e2");
    let report = fs::read(e1.join("report.json")).unwrap();
    assert_eq!(report, fs::read(e2.join("report.json")).unwrap());
    assert_eq!(fs::read_to_string(e1.join("records.jsonl")).unwrap().lines().count(), 5);
    assert_eq!(fs::read_dir(e1.join("trajectories")).unwrap().count(), 5);

    let table = ok(&["compare", s(&e1), s(&e2), "--out", s(&tmp.path().join("cmp"))]);
    assert!(table.contains("t("), "{table}");
    assert!(!table.lines().any(|l| l.contains(" * ")), "{table}");

    let plots = tmp.path().join("plots");
    ok(&["plot", "trajectory", s(&e1.join("trajectories/trial_0000.jsonl")), "--out", s(&plots)]);
    ok(&["plot", "velocity", &format!("a={}", s(&e1.join("trajectories"))), "--out", s(&plots)]);
    ok(&["plot", "learning-curve", s(&t1.join("learning_curve.jsonl")), "--smoothing", "3", "--out", s(&plots)]);
    for name in ["trajectory.svg", "velocity.svg", "learning_curve.svg"] {
        let svg = fs::read_to_string(plots.join(name)).unwrap();
        assert!(svg.contains("viewBox=\"0 0 640 420\""));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn rollout_writes_a_parseable_log() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("r");
    let msg = ok(&["rollout", "--trial", "2", "--out", s(&out)]);
    let steps: usize = msg.split(" after ").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    let log = groupnav::env::log::read_log(&out.join("rollout_0002.jsonl")).unwrap();
    assert_eq!(log.len(), steps + 1);
    assert_eq!((log[0].robot[0], log[0].robot[1]), (0.0, -4.0));
    assert!(log.last().unwrap().done.is_terminal());
}

#[test]
fn errors_exit_nonzero_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "env.n_pedestrians = 5\nenv.radius = 2\n").unwrap();
    let out = groupnav(&["train", "--config", s(&cfg)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("env.radius"), "{err}");

    let junk = tmp.path().join("junk.ckpt");
    fs::write(&junk, b"groupnav-checkpoint\nversion 1\n").unwrap();
    let out = groupnav(&["eval", "--checkpoint", s(&junk), "--out", s(&tmp.path().join("e"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("corrupt checkpoint"));

    let empty = tmp.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let out = groupnav(&["plot", "trajectory", s(&empty), "--out", s(tmp.path())]);
    assert!(!out.status.success());
}
