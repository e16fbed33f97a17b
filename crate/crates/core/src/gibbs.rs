//! Gibbs posterior for the AUC.
//!
//! With the squared-error loss `{theta - 1(u > v)}^2` the empirical risk is
//! a quadratic in `theta` centred at the Mann–Whitney estimate, so the
//! posterior `exp{-omega m n R(theta)} pi(theta)` on `[0, 1]` is a truncated
//! normal for both supported priors. Everything here is closed form apart
//! from the HPD search.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::auc::{mann_whitney, AucEstimate, ScoreData};
use crate::error::{Error, Result};
use crate::stats::normal::{log_norm_interval_mass, log_norm_pdf, quantile_unchecked};
use crate::stats::TruncatedNormal;

/// Prior on the AUC, supported on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prior {
    Flat,
    TruncatedNormal { location: f64, scale: f64 },
}

impl Prior {
    pub fn truncated_normal(location: f64, scale: f64) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::InvalidParameter {
                name: "prior location",
                value: location,
                reason: "must be finite",
            });
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "prior scale",
                value: scale,
                reason: "must be positive and finite",
            });
        }
        Ok(Prior::TruncatedNormal { location, scale })
    }
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prior::Flat => write!(f, "flat"),
            Prior::TruncatedNormal { location, scale } => write!(f, "truncnorm:{location},{scale}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalKind {
    #[serde(rename = "HPD")]
    Hpd,
    #[serde(rename = "equal-tailed")]
    EqualTailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibleInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub kind: IntervalKind,
}

impl CredibleInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Posterior `TruncatedNormal(mu_mn, sigma_mn, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsPosterior {
    pub mu_mn: f64,
    pub sigma_mn: f64,
    pub omega: f64,
    pub theta_hat: f64,
    pub m: usize,
    pub n: usize,
    pub prior: Prior,
}

impl GibbsPosterior {
    /// Posterior from the sufficient summaries `(theta_hat, m, n)`.
    pub fn from_estimate(
        theta_hat: f64,
        m: usize,
        n: usize,
        prior: Prior,
        omega: f64,
    ) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: omega,
                reason: "learning rate must be positive and finite",
            });
        }
        let mn = (m * n) as f64;
        let (mu_mn, sigma_mn) = match prior {
            Prior::Flat => (theta_hat, (2.0 * omega * mn).sqrt().recip()),
            Prior::TruncatedNormal { location, scale } => {
                let precision = 2.0 * omega * scale * scale * mn;
                (
                    (location + precision * theta_hat) / (1.0 + precision),
                    (scale * scale / (1.0 + precision)).sqrt(),
                )
            }
        };
        Ok(Self {
            mu_mn,
            sigma_mn,
            omega,
            theta_hat,
            m,
            n,
            prior,
        })
    }

    pub fn distribution(&self) -> TruncatedNormal {
        TruncatedNormal::new(self.mu_mn, self.sigma_mn, 0.0, 1.0)
            .expect("posterior location and scale are finite and positive")
    }

    /// Standardised truncation points `A = -mu/sigma`, `B = (1 - mu)/sigma`.
    pub fn standardized_bounds(&self) -> (f64, f64) {
        self.distribution().standardized_bounds()
    }
}

/// Gibbs posterior at learning rate `omega`.
pub fn build_posterior(data: &ScoreData, prior: Prior, omega: f64) -> Result<GibbsPosterior> {
    GibbsPosterior::from_estimate(mann_whitney(data), data.m(), data.n(), prior, omega)
}

/// Posterior mean and variance (truncated-normal closed forms).
pub fn posterior_moments(p: &GibbsPosterior) -> (f64, f64) {
    p.distribution().moments()
}

/// `100(1 - alpha)%` highest posterior density interval.
pub fn hpd_interval(p: &GibbsPosterior, alpha: f64) -> Result<CredibleInterval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must lie strictly inside (0, 1)",
        });
    }
    let (lower, upper) = hpd(&p.distribution(), 1.0 - alpha);
    Ok(CredibleInterval {
        lower,
        upper,
        level: 1.0 - alpha,
        kind: IntervalKind::Hpd,
    })
}

/// HPD set of a truncated normal at credibility `level`.
///
/// The density is unimodal with mode at the location clamped to the
/// support, so every level set is `[mu - h, mu + h]` intersected with the
/// support. The half-width `h` is found by safeguarded Newton iteration on
/// the enclosed mass, falling back to bisection whenever a step leaves the
/// current bracket.
pub fn hpd(d: &TruncatedNormal, level: f64) -> (f64, f64) {
    let (mu, sigma) = (d.location(), d.scale());
    let (lo, hi) = (d.lower(), d.upper());
    let log_z = d.log_normalizer();
    let zlo = (lo - mu) / sigma;
    let zhi = (hi - mu) / sigma;

    let endpoints = |h: f64| ((mu - h).max(lo), (mu + h).min(hi));
    let mass = |h: f64| {
        let (l, u) = endpoints(h);
        let (zl, zu) = (((l - mu) / sigma).max(zlo), ((u - mu) / sigma).min(zhi));
        if zl >= zu {
            0.0
        } else if zl == zlo && zu == zhi {
            1.0
        } else {
            (log_norm_interval_mass(zl, zu) - log_z).exp().min(1.0)
        }
    };
    let density = |x: f64| (log_norm_pdf((x - mu) / sigma) - log_z).exp() / sigma;

    let mode = mu.clamp(lo, hi);
    let mut h_lo = (mu - mode).abs();
    let mut h_hi = (mu - lo).max(hi - mu);

    // unclipped guess: symmetric interval holding level * Z of the parent mass
    let central = 0.5 + 0.5 * level * log_z.exp();
    let mut h = if central < 1.0 {
        sigma * quantile_unchecked(central)
    } else {
        0.5 * (h_lo + h_hi)
    };
    if !(h > h_lo && h < h_hi) {
        h = 0.5 * (h_lo + h_hi);
    }

    for _ in 0..200 {
        let f = mass(h) - level;
        if f.abs() <= 1e-13 {
            break;
        }
        if f < 0.0 {
            h_lo = h;
        } else {
            h_hi = h;
        }
        if h_hi - h_lo <= 4.0 * f64::EPSILON * h_hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let (l, u) = endpoints(h);
        let mut slope = 0.0;
        if mu - h > lo {
            slope += density(l);
        }
        if mu + h < hi {
            slope += density(u);
        }
        let step = if slope > 0.0 { h - f / slope } else { f64::NAN };
        h = if step > h_lo && step < h_hi {
            step
        } else {
            0.5 * (h_lo + h_hi)
        };
    }
    endpoints(h)
}

/// Learning rate matching the flat-prior posterior variance to the
/// Hoeffding variance of the Mann–Whitney estimate:
/// `omega = (m + n) / (2 m n) * (tau10/lambda + tau01/(1 - lambda))^{-1}`,
/// with `lambda = m / (m + n)`.
///
/// Errors when the plug-in variance is not positive; callers are expected
/// to fall back to bootstrap calibration.
pub fn analytic_learning_rate(data: &ScoreData) -> Result<f64> {
    let est = AucEstimate::from_data(data);
    let variance = est.asymptotic_variance();
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::NonpositiveVariance(variance));
    }
    let mn = (data.m() * data.n()) as f64;
    Ok((2.0 * mn * variance).recip())
}
