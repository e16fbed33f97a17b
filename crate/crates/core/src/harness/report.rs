//! Aligned-text rendering of fit, study and learning-rate results.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::analyze::{AnalysisReport, MethodReport};
use super::study::{median, Method, OmegaStudyRow, StudyResult};
use crate::error::{Error, Result};

/// Any JSON document produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportDoc {
    Analysis(AnalysisReport),
    Method(MethodReport),
    Study(Vec<StudyResult>),
    Omega(Vec<OmegaStudyRow>),
}

pub fn render(doc: &ReportDoc) -> String {
    match doc {
        ReportDoc::Analysis(a) => analysis_table(a),
        ReportDoc::Method(m) => method_table(std::slice::from_ref(m)),
        ReportDoc::Study(s) => study_tables(s),
        ReportDoc::Omega(o) => omega_table(o),
    }
}

pub fn render_json(json: &str) -> Result<String> {
    let doc: ReportDoc = serde_json::from_str(json)
        .map_err(|e| Error::Config(format!("unrecognised report JSON: {e}")))?;
    Ok(render(&doc))
}

pub fn method_table(methods: &[MethodReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8} {:>8} {:>8} {:>18} {:<16} {:>13}",
        "Method", "Mean", "SD", "Interval", "Kind", "Learning rate"
    );
    for m in methods {
        let interval = format!("({:.3}, {:.3})", m.ci.lower, m.ci.upper);
        let kind = format!("{:.0}% {}", 100.0 * m.ci.level, kind_label(&m.ci.kind));
        let rate = m
            .learning_rate
            .map_or_else(|| "-".to_string(), |w| format!("{w:.4}"));
        let _ = writeln!(
            out,
            "{:<8} {:>8.3} {:>8.3} {:>18} {:<16} {:>13}",
            m.method, m.posterior_mean, m.posterior_sd, interval, kind, rate
        );
    }
    out
}

fn kind_label(kind: &crate::gibbs::IntervalKind) -> &'static str {
    match kind {
        crate::gibbs::IntervalKind::Hpd => "HPD",
        crate::gibbs::IntervalKind::EqualTailed => "equal-tailed",
    }
}

pub fn analysis_table(a: &AnalysisReport) -> String {
    let mut out = format!(
        "m = {}, n = {}, Mann-Whitney estimate = {:.4}\n",
        a.m, a.n, a.theta_hat
    );
    out.push_str(&method_table(&a.methods));
    out
}

/// One block per scenario; rows are `n`, column groups are methods.
pub fn study_tables(results: &[StudyResult]) -> String {
    let mut by_scenario: BTreeMap<_, Vec<&StudyResult>> = BTreeMap::new();
    for r in results {
        by_scenario.entry(r.scenario).or_default().push(r);
    }
    let mut out = String::new();
    for (scenario, rows) in by_scenario {
        let methods: Vec<Method> = [Method::Gibbs, Method::Brl]
            .into_iter()
            .filter(|m| rows.iter().any(|r| r.method == *m))
            .collect();
        let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
        ns.sort_unstable();
        ns.dedup();
        let reps = rows.iter().map(|r| r.replications).max().unwrap_or(0);
        let _ = writeln!(
            out,
            "{scenario}: {} (true AUC {:.4}, {reps} replications)",
            scenario.describe(),
            scenario.theta_star()
        );
        let _ = write!(out, "{:>5}", "n");
        for m in &methods {
            let _ = write!(out, " | {:^35}", m.to_string());
        }
        out.push('\n');
        let _ = write!(out, "{:>5}", "");
        for _ in &methods {
            let _ = write!(
                out,
                " | {:>8} {:>8} {:>8} {:>8}",
                "Bias", "SE", "Length", "Coverage"
            );
        }
        out.push('\n');
        for n in ns {
            let _ = write!(out, "{n:>5}");
            for m in &methods {
                match rows.iter().find(|r| r.n == n && r.method == *m) {
                    Some(r) => {
                        let _ = write!(
                            out,
                            " | {:>8.3} {:>8.3} {:>8.3} {:>8.3}",
                            r.bias, r.avg_posterior_sd, r.mean_ci_length, r.coverage
                        );
                    }
                    None => {
                        let _ = write!(out, " | {:>8} {:>8} {:>8} {:>8}", "-", "-", "-", "-");
                    }
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

pub fn omega_table(rows: &[OmegaStudyRow]) -> String {
    let mut out = format!(
        "{:>5} {:>12} {:>14} {:>10} {:>12}\n",
        "n", "oracle", "median calib.", "reps", "log ratio"
    );
    for r in rows {
        let med = median(&r.omega_hat);
        let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.5}"));
        let ratio = med.map(|m| (m / r.omega_oracle).ln());
        let _ = writeln!(
            out,
            "{:>5} {:>12.5} {:>14} {:>10} {:>12}",
            r.n,
            r.omega_oracle,
            fmt(med),
            r.omega_hat.len(),
            fmt(ratio)
        );
    }
    out
}
