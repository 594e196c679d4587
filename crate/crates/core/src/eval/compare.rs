use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::metrics::{samples, trial_metrics, MetricsReport, TrialMetrics, METRICS};
use super::{pooled_t_test, TTestResult, TrialRecord};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub mean_a: Option<f64>,
    pub mean_b: Option<f64>,
    pub test: Option<TTestResult>,
    /// Why no test could be run, if so.
    pub test_error: Option<String>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub label_a: String,
    pub label_b: String,
    pub report_a: MetricsReport,
    pub report_b: MetricsReport,
    pub rows: Vec<ComparisonRow>,
}

/// Per-metric pooled t-tests of policy `a` against policy `b`.
pub fn compare_policies(
    label_a: &str,
    report_a: &MetricsReport,
    records_a: &[TrialRecord],
    label_b: &str,
    report_b: &MetricsReport,
    records_b: &[TrialRecord],
) -> Result<Comparison> {
    if report_a.settings != report_b.settings {
        return Err(Error::InvalidComparison(format!(
            "settings differ: {:?} vs {:?}",
            report_a.settings, report_b.settings
        )));
    }
    if records_a.len() != report_a.trials || records_b.len() != report_b.trials {
        return Err(Error::InvalidComparison("record counts do not match their reports".into()));
    }
    let per = |recs: &[TrialRecord], rep: &MetricsReport| -> Vec<TrialMetrics> {
        recs.iter().map(|r| trial_metrics(r, &rep.settings)).collect()
    };
    let (ma, mb) = (per(records_a, report_a), per(records_b, report_b));

    let rows = METRICS
        .iter()
        .map(|&(name, f)| {
            let (sa, sb) = (samples(&ma, f), samples(&mb, f));
            let (test, test_error) = match pooled_t_test(&sa, &sb) {
                Ok(t) => (Some(t), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ComparisonRow {
                metric: name.to_string(),
                mean_a: report_a.summary(name).map(|s| s.mean),
                mean_b: report_b.summary(name).map(|s| s.mean),
                significant: test.is_some_and(|t| t.p < SIGNIFICANCE_LEVEL),
                test,
                test_error,
            }
        })
        .collect();
    Ok(Comparison {
        label_a: label_a.to_string(),
        label_b: label_b.to_string(),
        report_a: report_a.clone(),
        report_b: report_b.clone(),
        rows,
    })
}

impl Comparison {
    /// Side-by-side table; significant rows are marked with `*`.
    pub fn render(&self) -> String {
        let (a, b) = (&self.report_a, &self.report_b);
        let mut out = format!("{:<26}{:>14}{:>14}   test\n", "metric", self.label_a, self.label_b);
        for (name, x, y) in [
            ("successes", a.successes, b.successes),
            ("pedestrian collisions", a.collisions, b.collisions),
            ("timeouts", a.timeouts, b.timeouts),
            ("group intersections", a.group_intersections, b.group_intersections),
        ] {
            out += &format!("{name:<26}{x:>14}{y:>14}\n");
        }
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
        for row in &self.rows {
            let test = match (&row.test, &row.test_error) {
                (Some(t), _) => format!("t({})={:.2}, p={:.4}", t.df, t.t, t.p),
                (None, Some(e)) => format!("n/a ({e})"),
                (None, None) => "n/a".to_string(),
            };
            let mark = if row.significant { "*" } else { " " };
            out += &format!(
                "{:<26}{:>14}{:>14} {mark} {test}\n",
                row.metric,
                cell(row.mean_a),
                cell(row.mean_b)
            );
        }
        out += "* p < 0.05 (two-tailed pooled t-test)\n";
        out
    }
}
