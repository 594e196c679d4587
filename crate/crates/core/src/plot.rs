//! Standalone SVG figures: trajectory overlays, trial-averaged time series,
//! and learning curves.

use std::fmt::Write as _;

use crate::env::log::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, Vec2};
use crate::ppo::CurveRecord;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSeries {
    /// Mean robot-pedestrian distance per step.
    Distance,
    /// Mean pedestrian speed per step.
    Velocity,
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Bounds {
    fn of(points: impl IntoIterator<Item = (f64, f64)>) -> Option<Self> {
        let mut it = points.into_iter().filter(|(x, y)| x.is_finite() && y.is_finite());
        let (x, y) = it.next()?;
        let mut b = Bounds { x0: x, x1: x, y0: y, y1: y };
        for (x, y) in it {
            b.x0 = b.x0.min(x);
            b.x1 = b.x1.max(x);
            b.y0 = b.y0.min(y);
            b.y1 = b.y1.max(y);
        }
        Some(b.padded())
    }

    fn padded(mut self) -> Self {
        for (lo, hi) in [(&mut self.x0, &mut self.x1), (&mut self.y0, &mut self.y1)] {
            if *hi - *lo < 1e-9 {
                *lo -= 0.5;
                *hi += 0.5;
            }
        }
        self
    }

    fn square(self) -> Self {
        let (w, h) = (self.x1 - self.x0, self.y1 - self.y0);
        let s = w.max(h) * 0.5;
        let (cx, cy) = ((self.x0 + self.x1) * 0.5, (self.y0 + self.y1) * 0.5);
        Bounds { x0: cx - s, x1: cx + s, y0: cy - s, y1: cy + s }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str) -> String {
    let mut s = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    );
    writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>").unwrap();
    writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    s
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn axes(s: &mut String, b: &Bounds, xlabel: &str, ylabel: &str) {
    let (l, r, t, bot) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(s, "<g stroke=\"#444\" stroke-width=\"1\" fill=\"none\">").unwrap();
    writeln!(s, "<rect x=\"{l}\" y=\"{t}\" width=\"{}\" height=\"{}\"/>", r - l, bot - t).unwrap();
    s.push_str("</g>\n<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n");
    for x in nice_ticks(b.x0, b.x1) {
        let px = b.px(x);
        writeln!(s, "<line x1=\"{px:.2}\" y1=\"{bot}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"#444\"/>", bot + 4.0).unwrap();
        writeln!(s, "<text x=\"{px:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>", bot + 16.0, fmt_tick(x)).unwrap();
    }
    for y in nice_ticks(b.y0, b.y1) {
        let py = b.py(y);
        writeln!(s, "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{l}\" y2=\"{py:.2}\" stroke=\"#444\"/>", l - 4.0).unwrap();
        writeln!(s, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", l - 7.0, py + 4.0, fmt_tick(y)).unwrap();
    }
    writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", WIDTH / 2.0, HEIGHT - 14.0, escape(xlabel)).unwrap();
    writeln!(
        s,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    )
    .unwrap();
    s.push_str("</g>\n");
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn polyline(s: &mut String, b: &Bounds, pts: &[(f64, f64)], color: &str, width: f64, extra: &str) {
    let mut d = String::new();
    for (x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
        write!(d, "{:.2},{:.2} ", b.px(*x), b.py(*y)).unwrap();
    }
    writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"{extra}/>",
        d.trim_end()
    )
    .unwrap();
}

fn circles(s: &mut String, b: &Bounds, pts: &[(f64, f64)], color: &str) {
    for (x, y) in pts {
        writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>", b.px(*x), b.py(*y)).unwrap();
    }
}

fn legend(s: &mut String, entries: &[(&str, &str)]) {
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = MARGIN + 14.0 + 16.0 * i as f64;
        let x = WIDTH - MARGIN - 150.0;
        writeln!(s, "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>", x + 18.0).unwrap();
        writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            x + 24.0,
            y + 4.0,
            escape(label)
        )
        .unwrap();
    }
}

/// Robot path, pedestrian paths, and group hull snapshots every `hull_every` steps.
pub fn trajectory_svg(log: &[TrajectoryRecord], hull_every: usize, title: &str) -> Result<String> {
    if log.is_empty() {
        return Err(Error::InvalidArgument("cannot plot an empty trajectory log".into()));
    }
    let robot: Vec<(f64, f64)> = log.iter().map(|r| (r.robot[0], r.robot[1])).collect();
    let goal = (log[0].robot[5], log[0].robot[6]);
    let n_peds = log[0].pedestrians.len();
    let peds: Vec<Vec<(f64, f64)>> = (0..n_peds)
        .map(|i| log.iter().filter_map(|r| r.pedestrians.get(i)).map(|p| (p[0], p[1])).collect())
        .collect();
    let b = Bounds::of(robot.iter().chain(peds.iter().flatten()).copied().chain([goal]))
        .expect("non-empty log")
        .square();

    let mut s = header(title);
    axes(&mut s, &b, "x (m)", "y (m)");
    let groups = &log[0].groups;
    let color_of = |g: usize| PALETTE[(g + 1) % PALETTE.len()];
    if hull_every > 0 {
        let n_groups = groups.iter().copied().max().map_or(0, |g| g + 1);
        for rec in log.iter().step_by(hull_every) {
            for g in 0..n_groups {
                let members: Vec<Vec2> = rec
                    .pedestrians
                    .iter()
                    .zip(groups)
                    .filter(|(_, &gid)| gid == g)
                    .map(|(p, _)| Vec2::new(p[0], p[1]))
                    .collect();
                if members.len() < 2 {
                    continue;
                }
                let hull = convex_hull(&members)?;
                let mut pts: Vec<(f64, f64)> = hull.vertices().iter().map(|v| (v.x, v.y)).collect();
                pts.push(pts[0]);
                polyline(&mut s, &b, &pts, color_of(g), 1.0, " stroke-opacity=\"0.5\" stroke-dasharray=\"3,2\"");
            }
        }
    }
    for (i, path) in peds.iter().enumerate() {
        let color = color_of(groups.get(i).copied().unwrap_or(0));
        polyline(&mut s, &b, path, color, 1.2, " stroke-opacity=\"0.8\"");
        circles(&mut s, &b, &path[..1], color);
    }
    polyline(&mut s, &b, &robot, "#000", 2.2, "");
    circles(&mut s, &b, &robot[..1], "#000");
    writeln!(
        s,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"8\" height=\"8\" fill=\"none\" stroke=\"#000\"/>",
        b.px(goal.0) - 4.0,
        b.py(goal.1) - 4.0
    )
    .unwrap();
    legend(&mut s, &[("robot", "#000"), ("pedestrians (by group)", PALETTE[1])]);
    s.push_str("</svg>\n");
    Ok(s)
}

/// Per-step values of `kind` averaged across trials; trials that ended
/// earlier simply stop contributing. Returns `(time, mean)` pairs.
pub fn averaged_series(logs: &[Vec<TrajectoryRecord>], kind: TimeSeries, dt: f64) -> Result<Vec<(f64, f64)>> {
    if logs.is_empty() || logs.iter().all(Vec::is_empty) {
        return Err(Error::InvalidArgument("cannot plot empty trajectory logs".into()));
    }
    let len = logs.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = Vec::with_capacity(len);
    for k in 0..len {
        let mut sum = 0.0;
        let mut n = 0usize;
        let mut step = None;
        for rec in logs.iter().filter_map(|l| l.get(k)) {
            step.get_or_insert(rec.step);
            for p in &rec.pedestrians {
                sum += match kind {
                    TimeSeries::Distance => (p[0] - rec.robot[0]).hypot(p[1] - rec.robot[1]),
                    TimeSeries::Velocity => p[2].hypot(p[3]),
                };
                n += 1;
            }
        }
        if n > 0 {
            out.push((step.unwrap_or(k) as f64 * dt, sum / n as f64));
        }
    }
    Ok(out)
}

/// One curve per labelled set of logs (e.g. group-aware vs baseline).
pub fn time_series_svg(sets: &[(&str, &[Vec<TrajectoryRecord>])], kind: TimeSeries, dt: f64) -> Result<String> {
    let series: Vec<(&str, Vec<(f64, f64)>)> = sets
        .iter()
        .map(|(label, logs)| Ok((*label, averaged_series(logs, kind, dt)?)))
        .collect::<Result<_>>()?;
    let (title, ylabel) = match kind {
        TimeSeries::Distance => ("Mean robot-pedestrian distance", "distance (m)"),
        TimeSeries::Velocity => ("Mean pedestrian velocity", "velocity (m/s)"),
    };
    let b = Bounds::of(series.iter().flat_map(|(_, p)| p.iter().copied()))
        .ok_or_else(|| Error::InvalidArgument("no finite samples to plot".into()))?;
    let mut s = header(title);
    axes(&mut s, &b, "time (s)", ylabel);
    let mut entries = Vec::new();
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        polyline(&mut s, &b, pts, color, 1.8, "");
        circles(&mut s, &b, pts, color);
        entries.push((*label, color));
    }
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    Ok(s)
}

/// Mean episode reward per iteration, with a trailing moving average.
pub fn learning_curve_svg(curves: &[(&str, &[CurveRecord])], smoothing: usize) -> Result<String> {
    let series: Vec<(&str, Vec<(f64, f64)>)> = curves
        .iter()
        .map(|(label, c)| {
            let raw: Vec<(f64, f64)> = c
                .iter()
                .filter_map(|r| r.mean_episode_reward.map(|m| (r.iteration as f64, m)))
                .collect();
            (*label, moving_average(&raw, smoothing.max(1)))
        })
        .collect();
    let b = Bounds::of(series.iter().flat_map(|(_, p)| p.iter().copied()))
        .ok_or_else(|| Error::InvalidArgument("learning curve has no finished episodes".into()))?;
    let mut s = header("Learning curve");
    axes(&mut s, &b, "iteration", "mean episode reward");
    let mut entries = Vec::new();
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        polyline(&mut s, &b, pts, color, 1.5, "");
        entries.push((*label, color));
    }
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    Ok(s)
}

/// Trailing mean over up to `window` points.
pub fn moving_average(pts: &[(f64, f64)], window: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(pts.len());
    let mut sum = 0.0;
    for (i, &(x, y)) in pts.iter().enumerate() {
        sum += y;
        if i >= window {
            sum -= pts[i - window].1;
        }
        out.push((x, sum / (i + 1).min(window) as f64));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Done, RewardBreakdown};

    fn record(step: usize, robot_y: f64, ped: [f64; 5]) -> TrajectoryRecord {
        TrajectoryRecord {
            step,
            robot: [0.0, robot_y, 0.0, 1.0, 0.3, 0.0, 4.0, 1.0, 1.57],
            pedestrians: vec![ped],
            groups: vec![0],
            reward: RewardBreakdown::default(),
            total_reward: 0.0,
            done: Done::Running,
        }
    }

    #[test]
    fn series_spacing_follows_dt() {
        let log = vec![
            record(0, 0.0, [1.0, 0.0, 0.0, 0.0, 0.3]),
            record(1, 0.0, [2.0, 0.0, 0.6, 0.8, 0.3]),
            record(2, 0.0, [3.0, 0.0, 0.0, 0.0, 0.3]),
        ];
        let d = averaged_series(&[log.clone()], TimeSeries::Distance, 0.25).unwrap();
        assert_eq!(d, vec![(0.0, 1.0), (0.25, 2.0), (0.5, 3.0)]);
        let v = averaged_series(&[log], TimeSeries::Velocity, 0.25).unwrap();
        assert!((v[1].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert!(trajectory_svg(&[], 4, "x").is_err());
        assert!(averaged_series(&[], TimeSeries::Distance, 0.25).is_err());
        assert!(averaged_series(&[vec![]], TimeSeries::Distance, 0.25).is_err());
    }

    #[test]
    fn empty_scene_path_is_straight() {
        use crate::env::{CrowdEnv, EpisodeConfig, RewardConfig, Scene};
        use crate::eval::{run_episode, StraightLine};
        use crate::social_force::SfmParams;
        let cfg = EpisodeConfig::default();
        let env = CrowdEnv::from_scene(cfg.clone(), RewardConfig::default(), SfmParams::default(), Scene::empty(&cfg));
        let (_, log) = run_episode(env, &mut StraightLine, 0, true).unwrap();
        let log = log.unwrap();
        assert!(log.iter().all(|r| r.robot[0].abs() < 1e-12));
        let (y0, y1) = (log[0].robot[1], log.last().unwrap().robot[1]);
        assert_eq!(y0, -4.0);
        assert!((y1 - y0 - 7.5).abs() < 1e-12);
        let svg = trajectory_svg(&log, 4, "empty").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("viewBox"));
    }

    #[test]
    fn moving_average_window() {
        let pts = [(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)];
        assert_eq!(moving_average(&pts, 2), vec![(0.0, 1.0), (1.0, 2.0), (2.0, 4.0)]);
    }

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(-4.2, 4.2);
        assert_eq!(t.first(), Some(&-4.0));
        assert_eq!(t.last(), Some(&4.0));
    }
}
