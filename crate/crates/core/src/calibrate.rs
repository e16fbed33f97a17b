//! Learning-rate calibration.
//!
//! [`calibrate`] tunes the learning rate so that bootstrap HPD intervals
//! cover the full-data estimate at the nominal rate, solving
//! `c(omega) = 1 - alpha` by Robbins–Monro iteration
//! `omega <- omega + kappa_t (c(omega) - (1 - alpha))`. The bootstrap set
//! is drawn once up front, so `c` is a deterministic step function of
//! `omega` for the whole run.
//!
//! [`oracle_learning_rate`] solves the same equation under the true
//! data-generating law of a simulation scenario, which is only possible
//! because the scenario can be sampled afresh.

use serde::{Deserialize, Serialize};

use crate::auc::{mann_whitney, ScoreData};
use crate::error::{Error, Result};
use crate::gibbs::{analytic_learning_rate, hpd, GibbsPosterior, Prior};
use crate::harness::scenario::{generate, Scenario};
use crate::stats::RngStream;

/// Learning rates are clamped here after every update.
pub const OMEGA_MIN: f64 = 1e-12;

/// Coverage resolution required of [`oracle_learning_rate`].
pub const ORACLE_COVERAGE_TOLERANCE: f64 = 0.002;

const BOOTSTRAP_STREAM: u64 = 0xB007;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaInit {
    /// The analytic rate when it exists, otherwise 1.
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Number of bootstrap samples `B`.
    pub bootstrap_samples: usize,
    pub alpha: f64,
    /// Stop once `|c(omega) - (1 - alpha)| < epsilon`.
    pub epsilon: f64,
    /// Step sizes are `kappa_t = (t + 1)^(-kappa_exponent)`.
    pub kappa_exponent: f64,
    pub omega_init: OmegaInit,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            bootstrap_samples: 1000,
            alpha: 0.05,
            epsilon: 0.01,
            kappa_exponent: 0.51,
            omega_init: OmegaInit::Auto,
            max_iterations: 1000,
            seed: 0,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bootstrap_samples == 0 {
            return Err(Error::Config(
                "bootstrap sample count must be positive".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: self.alpha,
                reason: "must lie strictly inside (0, 1)",
            });
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
                reason: "tolerance must be positive",
            });
        }
        // (0.5, 1] makes sum kappa diverge and sum kappa^2 converge
        if !(self.kappa_exponent > 0.5 && self.kappa_exponent <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "kappa_exponent",
                value: self.kappa_exponent,
                reason: "must lie in (0.5, 1]",
            });
        }
        if let OmegaInit::Value(w) = self.omega_init {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "omega_init",
                    value: w,
                    reason: "must be positive and finite",
                });
            }
        }
        Ok(())
    }

    /// `kappa_t` for `t = 1, 2, ...`.
    pub fn step_size(&self, t: usize) -> f64 {
        (t as f64 + 1.0).powf(-self.kappa_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub t: usize,
    pub omega: f64,
    pub coverage: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTrace {
    pub omega_hat: f64,
    pub omega_init: f64,
    pub iterates: Vec<Iterate>,
    pub converged: bool,
}

/// Resamples each group with replacement, keeping group sizes.
pub fn bootstrap_resample(data: &ScoreData, rng: &mut RngStream) -> ScoreData {
    let draw = |xs: &[f64], rng: &mut RngStream| -> Vec<f64> {
        (0..xs.len()).map(|_| xs[rng.index(xs.len())]).collect()
    };
    let u = draw(data.u(), rng);
    let v = draw(data.v(), rng);
    ScoreData::new(u, v).expect("resample keeps sizes and finiteness")
}

/// The `B` bootstrap samples used by [`calibrate`] under `seed`.
pub fn bootstrap_set(data: &ScoreData, b: usize, seed: u64) -> Vec<ScoreData> {
    let base = RngStream::new(seed, BOOTSTRAP_STREAM);
    (0..b as u64)
        .map(|k| bootstrap_resample(data, &mut base.substream(k)))
        .collect()
}

/// Bootstrap estimates grouped by value; the posterior depends on a sample
/// only through its estimate and group sizes.
#[derive(Debug, Clone)]
struct BootstrapEstimates {
    values: Vec<(f64, usize)>,
    total: usize,
    m: usize,
    n: usize,
}

impl BootstrapEstimates {
    fn new(samples: &[ScoreData]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::Config("at least one bootstrap sample is required".into()))?;
        let (m, n) = (first.m(), first.n());
        let mut thetas: Vec<f64> = samples.iter().map(mann_whitney).collect();
        thetas.sort_by(f64::total_cmp);
        let mut values: Vec<(f64, usize)> = Vec::new();
        for t in thetas {
            match values.last_mut() {
                Some((v, c)) if *v == t => *c += 1,
                _ => values.push((t, 1)),
            }
        }
        Ok(Self {
            values,
            total: samples.len(),
            m,
            n,
        })
    }

    fn coverage(&self, theta_hat: f64, omega: f64, alpha: f64, prior: Prior) -> Result<f64> {
        let mut covered = 0;
        for &(t, count) in &self.values {
            let post = GibbsPosterior::from_estimate(t, self.m, self.n, prior, omega)?;
            let (lo, hi) = hpd(&post.distribution(), 1.0 - alpha);
            if lo <= theta_hat && theta_hat <= hi {
                covered += count;
            }
        }
        Ok(covered as f64 / self.total as f64)
    }
}

/// Fraction of bootstrap HPD intervals at rate `omega` that contain the
/// original-data estimate `theta_hat`.
pub fn coverage_estimate(
    boot_samples: &[ScoreData],
    theta_hat: f64,
    omega: f64,
    alpha: f64,
    prior: Prior,
) -> Result<f64> {
    BootstrapEstimates::new(boot_samples)?.coverage(theta_hat, omega, alpha, prior)
}

/// Bootstrap/stochastic-approximation calibration of the learning rate.
///
/// Non-convergence within `max_iterations` is reported through
/// `converged = false`, not as an error.
pub fn calibrate(
    data: &ScoreData,
    prior: Prior,
    cfg: &CalibrationConfig,
) -> Result<CalibrationTrace> {
    cfg.validate()?;
    let theta_hat = mann_whitney(data);
    let boot = BootstrapEstimates::new(&bootstrap_set(data, cfg.bootstrap_samples, cfg.seed))?;
    let omega_init = match cfg.omega_init {
        OmegaInit::Value(w) => w,
        OmegaInit::Auto => analytic_learning_rate(data).unwrap_or(1.0),
    };

    let target = 1.0 - cfg.alpha;
    let mut omega = omega_init;
    let mut iterates = Vec::new();
    let mut converged = false;
    for t in 1..=cfg.max_iterations {
        let coverage = boot.coverage(theta_hat, omega, cfg.alpha, prior)?;
        let delta = coverage - target;
        iterates.push(Iterate {
            t,
            omega,
            coverage,
            delta,
        });
        omega = (omega + cfg.step_size(t) * delta).max(OMEGA_MIN);
        if delta.abs() < cfg.epsilon {
            converged = true;
            break;
        }
    }
    Ok(CalibrationTrace {
        omega_hat: omega,
        omega_init,
        iterates,
        converged,
    })
}

/// Learning rate at which flat-prior HPD intervals cover the true AUC with
/// probability `1 - alpha`, estimated over `mc_reps` fresh datasets.
///
/// The datasets are fixed up front, making coverage a nonincreasing step
/// function of `omega`; the root is bracketed and bisected in `log omega`
/// until coverage is within [`ORACLE_COVERAGE_TOLERANCE`] of the target.
pub fn oracle_learning_rate(
    scenario: Scenario,
    m: usize,
    n: usize,
    alpha: f64,
    mc_reps: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must lie strictly inside (0, 1)",
        });
    }
    if (mc_reps as f64) * ORACLE_COVERAGE_TOLERANCE < 1.0 {
        return Err(Error::Config(format!(
            "{mc_reps} Monte Carlo replications cannot resolve coverage to {ORACLE_COVERAGE_TOLERANCE}; need at least {}",
            (1.0 / ORACLE_COVERAGE_TOLERANCE).ceil()
        )));
    }
    let theta_star = scenario.theta_star();
    let thetas = (0..mc_reps as u64)
        .map(|r| generate(scenario, m, n, &mut rng.substream(r)).map(|d| mann_whitney(&d)))
        .collect::<Result<Vec<_>>>()?;
    let target = 1.0 - alpha;
    let coverage = |log_omega: f64| -> Result<f64> {
        let omega = log_omega.exp();
        let mut covered = 0usize;
        for &t in &thetas {
            let post = GibbsPosterior::from_estimate(t, m, n, Prior::Flat, omega)?;
            let (lo, hi) = hpd(&post.distribution(), target);
            if lo <= theta_star && theta_star <= hi {
                covered += 1;
            }
        }
        Ok(covered as f64 / thetas.len() as f64)
    };

    // bracket: coverage(lo) >= target > coverage(hi)
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let mut c = coverage(lo)?;
    if (c - target).abs() <= ORACLE_COVERAGE_TOLERANCE {
        return Ok(1.0);
    }
    let step = 2.0;
    let mut expansions = 0;
    if c >= target {
        loop {
            hi += step;
            c = coverage(hi)?;
            if c < target {
                break;
            }
            lo = hi;
            expansions += 1;
            if expansions > 60 {
                return Err(Error::Config(
                    "oracle coverage never drops below target".into(),
                ));
            }
        }
    } else {
        loop {
            lo -= step;
            c = coverage(lo)?;
            if c >= target {
                break;
            }
            hi = lo;
            expansions += 1;
            if expansions > 60 {
                return Err(Error::Config("oracle coverage never reaches target".into()));
            }
        }
    }

    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let c = coverage(mid)?;
        if (c - target).abs() <= ORACLE_COVERAGE_TOLERANCE || hi - lo < 1e-10 {
            break;
        }
        if c >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid.exp())
}
