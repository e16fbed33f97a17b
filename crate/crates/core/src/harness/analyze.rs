//! Fitting one dataset: single-method fits and the four-method comparison
//! (two Gibbs posteriors, two BRL chains).

use std::path::Path;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::data::read_data_file;
use crate::auc::{mann_whitney, ScoreData};
use crate::brl::{brl_run, summarize_draws, BrlConfig, BrlInit};
use crate::calibrate::{calibrate, CalibrationConfig, CalibrationTrace};
use crate::error::{Error, Result};
use crate::gibbs::{
    analytic_learning_rate, build_posterior, hpd_interval, posterior_moments, CredibleInterval,
    Prior,
};
use crate::stats::RngStream;

/// How the Gibbs learning rate is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaChoice {
    Value(f64),
    /// Hoeffding-variance rate; errors when the variance estimate is not positive.
    Analytic,
    /// Hoeffding-variance rate, falling back to bootstrap calibration.
    AnalyticOrCalibrate,
    /// Bootstrap calibration.
    Calibrate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsFitConfig {
    pub prior: Prior,
    pub omega: OmegaChoice,
    pub alpha: f64,
    /// Used whenever calibration runs; its seed is derived from the fit seed.
    pub calibration: CalibrationConfig,
}

impl Default for GibbsFitConfig {
    fn default() -> Self {
        Self {
            prior: Prior::Flat,
            omega: OmegaChoice::Calibrate,
            alpha: 0.05,
            calibration: CalibrationConfig::default(),
        }
    }
}

/// Posterior summary for one method on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub posterior_mean: f64,
    pub posterior_sd: f64,
    pub ci: CredibleInterval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    pub seed: u64,
    pub config_echo: serde_json::Value,
}

/// Gibbs fit; also returns the calibration trace when calibration ran.
pub fn fit_gibbs(
    data: &ScoreData,
    name: &str,
    cfg: &GibbsFitConfig,
    seed: u64,
) -> Result<(MethodReport, Option<CalibrationTrace>)> {
    let calibration = CalibrationConfig {
        alpha: cfg.alpha,
        seed: RngStream::new(seed, 0).next_u64(),
        ..cfg.calibration.clone()
    };
    let run_calibration = || calibrate(data, cfg.prior, &calibration);
    let (omega, trace) = match cfg.omega {
        OmegaChoice::Value(w) => (w, None),
        OmegaChoice::Analytic => (analytic_learning_rate(data)?, None),
        OmegaChoice::AnalyticOrCalibrate => match analytic_learning_rate(data) {
            Ok(w) => (w, None),
            Err(Error::NonpositiveVariance(_)) => {
                let t = run_calibration()?;
                (t.omega_hat, Some(t))
            }
            Err(e) => return Err(e),
        },
        OmegaChoice::Calibrate => {
            let t = run_calibration()?;
            (t.omega_hat, Some(t))
        }
    };
    let post = build_posterior(data, cfg.prior, omega)?;
    let (mean, var) = posterior_moments(&post);
    let ci = hpd_interval(&post, cfg.alpha)?;

    let omega_echo = match cfg.omega {
        OmegaChoice::Value(w) => json!(w),
        OmegaChoice::Analytic => json!("analytic"),
        OmegaChoice::AnalyticOrCalibrate => json!("analytic-or-calibrate"),
        OmegaChoice::Calibrate => json!("calibrate"),
    };
    let mut echo = json!({
        "prior": cfg.prior.to_string(),
        "omega": omega_echo,
        "alpha": cfg.alpha,
    });
    if let Some(t) = &trace {
        echo["calibration"] = json!({
            "bootstrap_samples": calibration.bootstrap_samples,
            "epsilon": calibration.epsilon,
            "kappa_exponent": calibration.kappa_exponent,
            "max_iterations": calibration.max_iterations,
            "omega_init": t.omega_init,
            "iterations": t.iterates.len(),
            "converged": t.converged,
        });
    }
    let report = MethodReport {
        method: name.to_string(),
        posterior_mean: mean,
        posterior_sd: var.sqrt(),
        ci,
        learning_rate: Some(omega),
        seed,
        config_echo: echo,
    };
    Ok((report, trace))
}

/// BRL fit summarised by the mean, SD and equal-tailed interval of the AUC draws.
pub fn fit_brl(
    data: &ScoreData,
    name: &str,
    cfg: &BrlConfig,
    level: f64,
    seed: u64,
) -> Result<MethodReport> {
    let out = brl_run(data, cfg, RngStream::new(seed, 1))?;
    if out.rank_violations != 0 {
        return Err(Error::StuckChain {
            coordinate: format!("{} rank violations", out.rank_violations),
        });
    }
    let s = summarize_draws(&out.auc_draws(), level)?;
    let init = match cfg.init {
        BrlInit::NormalScores => json!("normal-scores"),
        BrlInit::Custom { a0, b2_0 } => json!({ "a0": a0, "b2_0": b2_0 }),
    };
    Ok(MethodReport {
        method: name.to_string(),
        posterior_mean: s.mean,
        posterior_sd: s.sd,
        ci: s.interval,
        learning_rate: None,
        seed,
        config_echo: json!({
            "n_samples": cfg.n_samples,
            "burn_in": cfg.burn_in,
            "thin": cfg.thin,
            "init": init,
            "kept": out.draws.len(),
        }),
    })
}

/// The four variants compared on a real dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub gibbs1: GibbsFitConfig,
    pub gibbs2: GibbsFitConfig,
    pub brl1: BrlConfig,
    pub brl2: BrlConfig,
    pub level: f64,
}

impl Default for AnalysisConfig {
    /// Gibbs1: flat prior. Gibbs2: `TN(0.75, 0.9^2)` prior. Both calibrated
    /// with 1000 bootstrap samples. BRL1/BRL2: 300000 sweeps, 5000 burn-in,
    /// started at `(a, b) = (2, 2)` and `(3, 2)`.
    fn default() -> Self {
        let gibbs1 = GibbsFitConfig::default();
        let gibbs2 = GibbsFitConfig {
            prior: Prior::TruncatedNormal {
                location: 0.75,
                scale: 0.9 * 0.9,
            },
            ..gibbs1.clone()
        };
        let brl = |a0: f64| BrlConfig {
            n_samples: 300_000,
            burn_in: 5_000,
            thin: 1,
            init: BrlInit::Custom { a0, b2_0: 4.0 },
        };
        Self {
            gibbs1,
            gibbs2,
            brl1: brl(2.0),
            brl2: brl(3.0),
            level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub m: usize,
    pub n: usize,
    pub theta_hat: f64,
    pub methods: Vec<MethodReport>,
}

/// Runs Gibbs1, Gibbs2, BRL1 and BRL2. Method `k` (0-based) uses seed
/// stream `seed + k`. Ties make the BRL fits fail.
pub fn analyze_data(data: &ScoreData, cfg: &AnalysisConfig, seed: u64) -> Result<AnalysisReport> {
    let s = |k: u64| seed.wrapping_add(k);
    let gibbs1 = GibbsFitConfig {
        alpha: 1.0 - cfg.level,
        ..cfg.gibbs1.clone()
    };
    let gibbs2 = GibbsFitConfig {
        alpha: 1.0 - cfg.level,
        ..cfg.gibbs2.clone()
    };
    let methods = vec![
        fit_gibbs(data, "Gibbs1", &gibbs1, s(0))?.0,
        fit_gibbs(data, "Gibbs2", &gibbs2, s(1))?.0,
        fit_brl(data, "BRL1", &cfg.brl1, cfg.level, s(2))?,
        fit_brl(data, "BRL2", &cfg.brl2, cfg.level, s(3))?,
    ];
    Ok(AnalysisReport {
        m: data.m(),
        n: data.n(),
        theta_hat: mann_whitney(data),
        methods,
    })
}

pub fn analyze_file(
    path: impl AsRef<Path>,
    cfg: &AnalysisConfig,
    seed: u64,
) -> Result<AnalysisReport> {
    analyze_data(&read_data_file(path)?, cfg, seed)
}
