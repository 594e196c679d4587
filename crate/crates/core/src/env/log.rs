//! Line-delimited trajectory log. One JSON object per step; every float is
//! written with 17 significant digits so a log reproduces states bit for bit.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{CrowdEnv, Done, RewardBreakdown};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: usize,
    /// `[px, py, vx, vy, rad, gx, gy, v_pref, theta]`
    pub robot: [f64; 9],
    /// `[px, py, vx, vy, rad]` per pedestrian.
    pub pedestrians: Vec<[f64; 5]>,
    pub groups: Vec<usize>,
    pub reward: RewardBreakdown,
    pub total_reward: f64,
    pub done: Done,
}

impl TrajectoryRecord {
    /// Snapshot of `env` after a step with the given reward, or at reset.
    pub fn capture(env: &CrowdEnv, reward: RewardBreakdown) -> Self {
        let obs = env.observation();
        Self {
            step: env.steps(),
            robot: obs.robot.to_array(),
            pedestrians: obs.pedestrians.iter().map(|p| p.to_array()).collect(),
            groups: env.layout().assignment().to_vec(),
            total_reward: reward.total(),
            reward,
            done: env.done(),
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = String::with_capacity(256 + 120 * self.pedestrians.len());
        write!(s, "{{\"step\":{},\"robot\":", self.step).unwrap();
        push_array(&mut s, &self.robot);
        s.push_str(",\"pedestrians\":[");
        for (i, p) in self.pedestrians.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            push_array(&mut s, p);
        }
        s.push_str("],\"groups\":[");
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "{g}").unwrap();
        }
        let r = &self.reward;
        write!(
            s,
            "],\"reward\":{{\"progress\":{},\"goal\":{},\"discomfort\":{},\"collision\":{},\"group\":{}}},\"total_reward\":{},\"done\":\"{}\"}}",
            fmt_f64(r.progress),
            fmt_f64(r.goal),
            fmt_f64(r.discomfort),
            fmt_f64(r.collision),
            fmt_f64(r.group),
            fmt_f64(self.total_reward),
            self.done.as_str()
        )
        .unwrap();
        s
    }
}

/// Decimal rendering with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_array(s: &mut String, values: &[f64]) {
    s.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&fmt_f64(*v));
    }
    s.push(']');
}

pub fn write_log<W: Write>(mut out: W, records: &[TrajectoryRecord]) -> Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_line())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_log(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (n, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::MalformedLog {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", n + 1),
        })?;
        out.push(rec);
    }
    if out.is_empty() {
        return Err(Error::MalformedLog { path: path.to_path_buf(), message: "empty log".into() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let back: f64 = fmt_f64(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn line_parses_back_bitwise() {
        let rec = TrajectoryRecord {
            step: 3,
            robot: [0.1, -4.0, 0.0, 1.0, 0.3, 0.0, 4.0, 1.0, std::f64::consts::FRAC_PI_2],
            pedestrians: vec![[1.0 / 3.0, 2.0, -0.5, 1e-300, 0.3]],
            groups: vec![0],
            reward: RewardBreakdown { progress: 0.025, ..Default::default() },
            total_reward: 0.025,
            done: Done::Running,
        };
        let back: TrajectoryRecord = serde_json::from_str(&rec.to_line()).unwrap();
        assert_eq!(back, rec);
        for (a, b) in back.robot.iter().zip(rec.robot.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
