//! Replication studies over the simulation scenarios.
//!
//! Each `(scenario, n, replication)` cell owns an RNG stream derived from
//! the study seed. The dataset is drawn from a child stream that does not
//! depend on the method, so Gibbs and BRL runs with one seed see the same
//! data. Per-replication results are collected in order and aggregated
//! afterwards, which keeps results independent of thread scheduling.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{generate, Scenario};
use crate::auc::ScoreData;
use crate::brl::{brl_run, summarize_draws, BrlConfig};
use crate::calibrate::{calibrate, oracle_learning_rate, CalibrationConfig};
use crate::error::{Error, Result};
use crate::gibbs::{build_posterior, hpd_interval, posterior_moments, CredibleInterval, Prior};
use crate::stats::RngStream;

const DATA_STREAM: u64 = 0;
const METHOD_STREAM: u64 = 1;
const ORACLE_STREAM: u64 = 0x0AC1E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Gibbs,
    #[serde(rename = "BRL")]
    Brl,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Gibbs => write!(f, "Gibbs"),
            Method::Brl => write!(f, "BRL"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gibbs" => Ok(Method::Gibbs),
            "brl" => Ok(Method::Brl),
            _ => Err(Error::Config(format!(
                "unknown method `{s}`; expected gibbs or brl"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasMode {
    /// `|mean of posterior means - theta_star|`
    #[default]
    AbsoluteOfMean,
    /// `mean of |posterior mean - theta_star|`
    MeanOfAbsolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// Prior for the Gibbs posterior.
    pub prior: Prior,
    /// Calibration settings; the seed field is replaced per replication.
    pub calibration: CalibrationConfig,
    pub brl: BrlConfig,
    /// Credible level of the reported intervals.
    pub level: f64,
    pub bias_mode: BiasMode,
}

impl StudyConfig {
    /// 200 bootstrap samples and a 20000-sweep BRL chain.
    pub fn desk() -> Self {
        Self {
            prior: Prior::Flat,
            calibration: CalibrationConfig {
                bootstrap_samples: 200,
                ..CalibrationConfig::default()
            },
            brl: BrlConfig::desk(),
            level: 0.95,
            bias_mode: BiasMode::default(),
        }
    }

    /// 1000 bootstrap samples and a 50000-sweep BRL chain.
    pub fn full() -> Self {
        Self {
            calibration: CalibrationConfig {
                bootstrap_samples: 1000,
                ..CalibrationConfig::default()
            },
            brl: BrlConfig::full(),
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidParameter {
                name: "level",
                value: self.level,
                reason: "must lie strictly inside (0, 1)",
            });
        }
        self.calibration.validate()?;
        self.brl.validate()
    }
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self::desk()
    }
}

/// Desk-scale replication count.
pub const DESK_REPLICATIONS: usize = 200;
/// Full-scale replication count.
pub const FULL_REPLICATIONS: usize = 1000;

/// Outcome of one method on one simulated dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub posterior_mean: f64,
    pub posterior_sd: f64,
    pub ci: CredibleInterval,
    pub covered: bool,
    /// Calibrated learning rate (Gibbs only).
    pub learning_rate: Option<f64>,
    /// Rank-constraint violations over the chain (BRL only).
    pub rank_violations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub scenario: Scenario,
    pub n: usize,
    pub method: Method,
    pub bias: f64,
    pub avg_posterior_sd: f64,
    pub mean_ci_length: f64,
    pub coverage: f64,
    pub covered: usize,
    pub replications: usize,
    pub seed: u64,
}

/// Stream owning replication `rep` of the `n` cell.
pub fn replication_stream(scenario: Scenario, n: usize, rep: usize, seed: u64) -> RngStream {
    RngStream::new(seed, scenario.number() as u64)
        .substream(n as u64)
        .substream(rep as u64)
}

/// Dataset of replication `rep`, shared by all methods.
pub fn replication_data(scenario: Scenario, n: usize, rep: usize, seed: u64) -> Result<ScoreData> {
    let stream = replication_stream(scenario, n, rep, seed);
    generate(scenario, n, n, &mut stream.substream(DATA_STREAM))
}

/// Gibbs posterior with a bootstrap-calibrated learning rate: mean, SD and HPD interval.
pub fn fit_gibbs_calibrated(
    data: &ScoreData,
    prior: Prior,
    calibration: &CalibrationConfig,
    level: f64,
) -> Result<(f64, f64, CredibleInterval, f64)> {
    let trace = calibrate(data, prior, calibration)?;
    let post = build_posterior(data, prior, trace.omega_hat)?;
    let (mean, var) = posterior_moments(&post);
    let ci = hpd_interval(&post, 1.0 - level)?;
    Ok((mean, var.sqrt(), ci, trace.omega_hat))
}

pub fn run_replication(
    scenario: Scenario,
    n: usize,
    method: Method,
    rep: usize,
    cfg: &StudyConfig,
    seed: u64,
) -> Result<Replication> {
    let stream = replication_stream(scenario, n, rep, seed);
    let data = generate(scenario, n, n, &mut stream.substream(DATA_STREAM))?;
    let mut method_rng = stream.substream(METHOD_STREAM);
    let theta_star = scenario.theta_star();
    match method {
        Method::Gibbs => {
            let calibration = CalibrationConfig {
                seed: method_rng.next_u64(),
                ..cfg.calibration.clone()
            };
            let (mean, sd, ci, omega) =
                fit_gibbs_calibrated(&data, cfg.prior, &calibration, cfg.level)?;
            Ok(Replication {
                posterior_mean: mean,
                posterior_sd: sd,
                ci,
                covered: ci.contains(theta_star),
                learning_rate: Some(omega),
                rank_violations: None,
            })
        }
        Method::Brl => {
            let out = brl_run(&data, &cfg.brl, method_rng)?;
            let s = summarize_draws(&out.auc_draws(), cfg.level)?;
            Ok(Replication {
                posterior_mean: s.mean,
                posterior_sd: s.sd,
                ci: s.interval,
                covered: s.interval.contains(theta_star),
                learning_rate: None,
                rank_violations: Some(out.rank_violations),
            })
        }
    }
}

/// All replications of one cell, in replication order.
pub fn run_cell(
    scenario: Scenario,
    n: usize,
    method: Method,
    replications: usize,
    cfg: &StudyConfig,
    seed: u64,
) -> Result<Vec<Replication>> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::Config(format!("group size {n} is below 2")));
    }
    (0..replications)
        .into_par_iter()
        .map(|rep| run_replication(scenario, n, method, rep, cfg, seed))
        .collect()
}

/// Summary row for one cell.
pub fn summarize_cell(
    scenario: Scenario,
    n: usize,
    method: Method,
    reps: &[Replication],
    bias_mode: BiasMode,
    seed: u64,
) -> StudyResult {
    let count = reps.len() as f64;
    let theta_star = scenario.theta_star();
    let bias = match bias_mode {
        BiasMode::AbsoluteOfMean => {
            (reps.iter().map(|r| r.posterior_mean).sum::<f64>() / count - theta_star).abs()
        }
        BiasMode::MeanOfAbsolute => {
            reps.iter()
                .map(|r| (r.posterior_mean - theta_star).abs())
                .sum::<f64>()
                / count
        }
    };
    let covered = reps.iter().filter(|r| r.covered).count();
    StudyResult {
        scenario,
        n,
        method,
        bias,
        avg_posterior_sd: reps.iter().map(|r| r.posterior_sd).sum::<f64>() / count,
        mean_ci_length: reps.iter().map(|r| r.ci.length()).sum::<f64>() / count,
        coverage: covered as f64 / count,
        covered,
        replications: reps.len(),
        seed,
    }
}

/// One [`StudyResult`] per entry of `n_grid` (`m = n`). Zero replications
/// give an empty result.
pub fn run_study(
    scenario: Scenario,
    n_grid: &[usize],
    method: Method,
    replications: usize,
    cfg: &StudyConfig,
    seed: u64,
) -> Result<Vec<StudyResult>> {
    if replications == 0 {
        return Ok(Vec::new());
    }
    n_grid
        .iter()
        .map(|&n| {
            let reps = run_cell(scenario, n, method, replications, cfg, seed)?;
            Ok(summarize_cell(
                scenario,
                n,
                method,
                &reps,
                cfg.bias_mode,
                seed,
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaStudyConfig {
    pub calibration: CalibrationConfig,
    pub alpha: f64,
    /// Datasets behind each oracle rate.
    pub oracle_reps: usize,
}

impl OmegaStudyConfig {
    pub fn desk() -> Self {
        Self {
            calibration: StudyConfig::desk().calibration,
            alpha: 0.05,
            oracle_reps: 1000,
        }
    }

    pub fn full() -> Self {
        Self {
            calibration: StudyConfig::full().calibration,
            oracle_reps: 10_000,
            ..Self::desk()
        }
    }
}

impl Default for OmegaStudyConfig {
    fn default() -> Self {
        Self::desk()
    }
}

/// Calibrated rates for each replication at one `n`, with the oracle rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaStudyRow {
    pub n: usize,
    pub omega_hat: Vec<f64>,
    pub omega_oracle: f64,
}

impl OmegaStudyRow {
    pub fn median_omega_hat(&self) -> Option<f64> {
        median(&self.omega_hat)
    }
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len() / 2;
    Some(if s.len() % 2 == 1 {
        s[k]
    } else {
        0.5 * (s[k - 1] + s[k])
    })
}

/// Calibrated learning rates on `replications` datasets per `n`
/// (flat prior), next to the oracle rate for that `n`.
pub fn omega_study(
    scenario: Scenario,
    n_grid: &[usize],
    replications: usize,
    cfg: &OmegaStudyConfig,
    seed: u64,
) -> Result<Vec<OmegaStudyRow>> {
    let calibration = CalibrationConfig {
        alpha: cfg.alpha,
        ..cfg.calibration.clone()
    };
    calibration.validate()?;
    n_grid
        .iter()
        .map(|&n| {
            let omega_hat = (0..replications)
                .into_par_iter()
                .map(|rep| {
                    let stream = replication_stream(scenario, n, rep, seed);
                    let data = generate(scenario, n, n, &mut stream.substream(DATA_STREAM))?;
                    let cal = CalibrationConfig {
                        seed: stream.substream(METHOD_STREAM).next_u64(),
                        ..calibration.clone()
                    };
                    Ok(calibrate(&data, Prior::Flat, &cal)?.omega_hat)
                })
                .collect::<Result<Vec<f64>>>()?;
            let mut oracle_rng = RngStream::new(seed, ORACLE_STREAM).substream(n as u64);
            let omega_oracle =
                oracle_learning_rate(scenario, n, n, cfg.alpha, cfg.oracle_reps, &mut oracle_rng)?;
            Ok(OmegaStudyRow {
                n,
                omega_hat,
                omega_oracle,
            })
        })
        .collect()
}

/// Plot-ready long format: `n,source,omega` with one `oracle` row per `n`.
pub fn write_omega_csv(rows: &[OmegaStudyRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "source", "omega"])
        .map_err(csv_error)?;
    for row in rows {
        let n = row.n.to_string();
        w.write_record([n.as_str(), "oracle", &row.omega_oracle.to_string()])
            .map_err(csv_error)?;
        for omega in &row.omega_hat {
            w.write_record([n.as_str(), "calibrated", &omega.to_string()])
                .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
