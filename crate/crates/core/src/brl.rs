//! Binormal rank-likelihood (BRL) Gibbs sampler.
//!
//! Scores are modelled as monotone images of latent `W_i ~ N(a, b^2)` and
//! `Z_j ~ N(0, 1)`, and only the observed ranks enter the likelihood. Under
//! the Jeffreys prior `b^-2` the sampler cycles through
//!
//! - `a | . ~ N(mean(W), b^2 / m)`
//! - `b^2 | . ~ IG((m - 1) / 2, sum (W_i - a)^2 / 2)`
//! - `W_i | . ~ N(a, b^2)` truncated to the rank interval of `W_i`
//! - `Z_j | . ~ N(0, 1)` truncated to the rank interval of `Z_j`
//!
//! and reports the binormal AUC `Phi(a / sqrt(b^2 + 1))` for every kept
//! state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::auc::ScoreData;
use crate::error::{Error, Result};
use crate::gibbs::{CredibleInterval, IntervalKind};
use crate::stats::{norm_cdf, norm_quantile, ranks, RngStream, TruncatedNormal};

/// Floor on the initial `b^2` derived from normal scores.
const MIN_INITIAL_B2: f64 = 1e-6;

/// `Phi(a / sqrt(b2 + 1))`.
pub fn binormal_auc(a: f64, b2: f64) -> Result<f64> {
    if !(b2 > 0.0 && b2.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "b2",
            value: b2,
            reason: "must be positive and finite",
        });
    }
    if !a.is_finite() {
        return Err(Error::InvalidParameter {
            name: "a",
            value: a,
            reason: "must be finite",
        });
    }
    Ok(norm_cdf(a / (b2 + 1.0).sqrt()))
}

/// A latent coordinate: `W(i)` for group 1, `Z(j)` for group 0 (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    W(usize),
    Z(usize),
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coordinate::W(i) => write!(f, "W[{i}]"),
            Coordinate::Z(j) => write!(f, "Z[{j}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrlInit {
    /// Latents at normal scores of their ranks, `(a, b^2)` from the `W` scores.
    NormalScores,
    /// Latents at normal scores, `(a, b^2)` as given.
    Custom { a0: f64, b2_0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrlConfig {
    /// Total number of sweeps, burn-in included.
    pub n_samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub init: BrlInit,
}

impl BrlConfig {
    /// 20000 sweeps with 4000 burn-in.
    pub fn desk() -> Self {
        Self {
            n_samples: 20_000,
            burn_in: 4_000,
            thin: 1,
            init: BrlInit::NormalScores,
        }
    }

    /// 50000 sweeps with 10000 burn-in.
    pub fn full() -> Self {
        Self {
            n_samples: 50_000,
            burn_in: 10_000,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.burn_in >= self.n_samples {
            return Err(Error::Config(format!(
                "burn-in ({}) must be smaller than the total number of sweeps ({})",
                self.burn_in, self.n_samples
            )));
        }
        if let BrlInit::Custom { a0, b2_0 } = self.init {
            if !a0.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "a0",
                    value: a0,
                    reason: "must be finite",
                });
            }
            if !(b2_0 > 0.0 && b2_0.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "b2_0",
                    value: b2_0,
                    reason: "must be positive and finite",
                });
            }
        }
        Ok(())
    }

    /// Number of states kept by [`brl_run`].
    pub fn kept(&self) -> usize {
        (self.n_samples - self.burn_in) / self.thin
    }
}

impl Default for BrlConfig {
    fn default() -> Self {
        Self::desk()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrlDraw {
    pub a: f64,
    pub b2: f64,
    pub auc: f64,
}

/// Sampler state. Latent values are stored `W` first, then `Z`.
#[derive(Debug, Clone)]
pub struct BrlChain {
    a: f64,
    b2: f64,
    latent: Vec<f64>,
    m: usize,
    rank_target: Vec<usize>,
    /// `by_rank[r - 1]` is the coordinate holding target rank `r`.
    by_rank: Vec<usize>,
    rng: RngStream,
}

impl BrlChain {
    /// Chain for `data` with latents at normal scores. Errors on ties.
    pub fn new(data: &ScoreData, init: BrlInit, rng: RngStream) -> Result<Self> {
        let scores: Vec<f64> = data.u().iter().chain(data.v()).copied().collect();
        let rank_target = ranks(&scores)?;
        let total = scores.len() as f64;
        let latent = rank_target
            .iter()
            .map(|&r| norm_quantile((r as f64 - 0.5) / total))
            .collect::<Result<Vec<_>>>()?;
        let m = data.m();
        let (a, b2) = match init {
            BrlInit::NormalScores => {
                let w = &latent[..m];
                let mean = w.iter().sum::<f64>() / m as f64;
                let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m as f64 - 1.0);
                (mean, var.max(MIN_INITIAL_B2))
            }
            BrlInit::Custom { a0, b2_0 } => (a0, b2_0),
        };
        Self::from_state(
            a,
            b2,
            latent[..m].to_vec(),
            latent[m..].to_vec(),
            rank_target,
            rng,
        )
    }

    /// Chain from an explicit state; the latents must already realise
    /// `rank_target`, which ranks `W` first and then `Z`.
    pub fn from_state(
        a: f64,
        b2: f64,
        w: Vec<f64>,
        z: Vec<f64>,
        rank_target: Vec<usize>,
        rng: RngStream,
    ) -> Result<Self> {
        if !(b2 > 0.0 && b2.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "b2",
                value: b2,
                reason: "must be positive and finite",
            });
        }
        let m = w.len();
        let latent: Vec<f64> = w.into_iter().chain(z).collect();
        if rank_target.len() != latent.len() {
            return Err(Error::Config(format!(
                "{} target ranks for {} latent values",
                rank_target.len(),
                latent.len()
            )));
        }
        if ranks(&latent)? != rank_target {
            return Err(Error::Config(
                "latent values do not realise the target ranks".into(),
            ));
        }
        let mut by_rank = vec![0; latent.len()];
        for (k, &r) in rank_target.iter().enumerate() {
            by_rank[r - 1] = k;
        }
        Ok(Self {
            a,
            b2,
            latent,
            m,
            rank_target,
            by_rank,
            rng,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn w(&self) -> &[f64] {
        &self.latent[..self.m]
    }

    pub fn z(&self) -> &[f64] {
        &self.latent[self.m..]
    }

    pub fn rank_target(&self) -> &[usize] {
        &self.rank_target
    }

    pub fn auc(&self) -> Result<f64> {
        binormal_auc(self.a, self.b2)
    }

    fn slot(&self, which: Coordinate) -> usize {
        match which {
            Coordinate::W(i) => i,
            Coordinate::Z(j) => self.m + j,
        }
    }

    /// Open interval a coordinate can move in without changing the ranks:
    /// the neighbours at target ranks `r - 1` and `r + 1`, infinite at the ends.
    pub fn rank_interval(&self, which: Coordinate) -> (f64, f64) {
        let r = self.rank_target[self.slot(which)];
        let lower = if r == 1 {
            f64::NEG_INFINITY
        } else {
            self.latent[self.by_rank[r - 2]]
        };
        let upper = if r == self.latent.len() {
            f64::INFINITY
        } else {
            self.latent[self.by_rank[r]]
        };
        (lower, upper)
    }

    /// Number of adjacent target-rank pairs whose latent values are out of order.
    pub fn rank_violations(&self) -> usize {
        self.by_rank
            .windows(2)
            .filter(|p| !(self.latent[p[0]] < self.latent[p[1]]))
            .count()
    }

    pub fn update_a(&mut self) {
        let m = self.m as f64;
        let mean = self.w().iter().sum::<f64>() / m;
        self.a = mean + (self.b2 / m).sqrt() * self.rng.standard_normal();
    }

    pub fn update_b2(&mut self) -> Result<()> {
        let shape = (self.m as f64 - 1.0) / 2.0;
        let a = self.a;
        let rate = 0.5 * self.w().iter().map(|x| (x - a) * (x - a)).sum::<f64>();
        let b2 = inverse_gamma(shape, rate, &mut self.rng)?;
        if !(b2 > 0.0 && b2.is_finite()) {
            return Err(Error::StuckChain {
                coordinate: format!("b2 (drew {b2})"),
            });
        }
        self.b2 = b2;
        Ok(())
    }

    pub fn update_latent(&mut self, which: Coordinate) -> Result<()> {
        let (lower, upper) = self.rank_interval(which);
        let (location, scale) = match which {
            Coordinate::W(_) => (self.a, self.b2.sqrt()),
            Coordinate::Z(_) => (0.0, 1.0),
        };
        let stuck = |e| Error::StuckChain {
            coordinate: format!("{which} on [{lower}, {upper}] with N({location}, {scale}^2): {e}"),
        };
        let x = TruncatedNormal::new(location, scale, lower, upper)
            .and_then(|d| d.sample(&mut self.rng))
            .map_err(stuck)?;
        let k = self.slot(which);
        self.latent[k] = x;
        Ok(())
    }

    /// One systematic-scan sweep: `a`, `b^2`, every `W_i`, every `Z_j`.
    pub fn sweep(&mut self) -> Result<()> {
        self.update_a();
        self.update_b2()?;
        for i in 0..self.m {
            self.update_latent(Coordinate::W(i))?;
        }
        for j in 0..self.latent.len() - self.m {
            self.update_latent(Coordinate::Z(j))?;
        }
        Ok(())
    }
}

/// Kept draws plus the number of rank violations seen over all sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrlOutput {
    pub draws: Vec<BrlDraw>,
    pub sweeps: usize,
    pub rank_violations: usize,
}

impl BrlOutput {
    pub fn auc_draws(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.auc).collect()
    }
}

/// Runs `cfg.n_samples` sweeps and keeps every `thin`-th state after burn-in.
pub fn brl_run(data: &ScoreData, cfg: &BrlConfig, rng: RngStream) -> Result<BrlOutput> {
    cfg.validate()?;
    let mut chain = BrlChain::new(data, cfg.init, rng)?;
    let mut draws = Vec::with_capacity(cfg.kept());
    let mut rank_violations = 0;
    for t in 1..=cfg.n_samples {
        chain.sweep()?;
        let bad = chain.rank_violations();
        debug_assert_eq!(bad, 0, "rank constraint broken at sweep {t}");
        rank_violations += bad;
        if t > cfg.burn_in && (t - cfg.burn_in).is_multiple_of(cfg.thin) {
            draws.push(BrlDraw {
                a: chain.a,
                b2: chain.b2,
                auc: chain.auc()?,
            });
        }
    }
    Ok(BrlOutput {
        draws,
        sweeps: cfg.n_samples,
        rank_violations,
    })
}

/// Posterior summary of a set of AUC draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrawSummary {
    pub mean: f64,
    pub sd: f64,
    pub interval: CredibleInterval,
}

/// Mean, standard deviation and equal-tailed `level` interval of `draws`.
pub fn summarize_draws(draws: &[f64], level: f64) -> Result<DrawSummary> {
    if draws.is_empty() {
        return Err(Error::Config("no draws to summarise".into()));
    }
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = if draws.len() > 1 {
        draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(DrawSummary {
        mean,
        sd: var.sqrt(),
        interval: equal_tailed_interval(draws, level)?,
    })
}

/// Sample-quantile interval cutting `(1 - level) / 2` from each tail, with
/// linear interpolation between order statistics.
pub fn equal_tailed_interval(draws: &[f64], level: f64) -> Result<CredibleInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter {
            name: "level",
            value: level,
            reason: "must lie strictly inside (0, 1)",
        });
    }
    if draws.is_empty() {
        return Err(Error::Config("no draws to summarise".into()));
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    Ok(CredibleInterval {
        lower: sample_quantile(&sorted, tail),
        upper: sample_quantile(&sorted, 1.0 - tail),
        level,
        kind: IntervalKind::EqualTailed,
    })
}

fn sample_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Gamma(shape, 1) by Marsaglia–Tsang, boosted for `shape < 1`.
pub fn gamma(shape: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "shape",
            value: shape,
            reason: "must be positive and finite",
        });
    }
    if shape < 1.0 {
        let g = gamma(shape + 1.0, rng)?;
        return Ok(g * rng.uniform().powf(1.0 / shape));
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.standard_normal();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return Ok(d * v);
        }
    }
}

/// Inverse gamma with density proportional to `x^(-shape-1) exp(-rate/x)`.
pub fn inverse_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "rate",
            value: rate,
            reason: "must be positive and finite",
        });
    }
    Ok(rate / gamma(shape, rng)?)
}
