//! Mann–Whitney AUC estimate, its empirical risk, and the Hoeffding
//! variance components.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two independent score samples: `u` from group 1, `v` from group 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreData {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl ScoreData {
    /// Requires at least two finite scores per group.
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        for (group, xs) in [(1u8, &u), (0u8, &v)] {
            if xs.len() < 2 {
                return Err(Error::TooFewScores {
                    group,
                    len: xs.len(),
                });
            }
            if let Some(index) = xs.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFiniteScore { group, index });
            }
        }
        Ok(Self { u, v })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn m(&self) -> usize {
        self.u.len()
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    /// Applies `f` to every score in both groups.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.u.iter().map(|&x| f(x)).collect(),
            self.v.iter().map(|&x| f(x)).collect(),
        )
    }

    /// Group labels swapped.
    pub fn swapped(&self) -> Self {
        Self {
            u: self.v.clone(),
            v: self.u.clone(),
        }
    }
}

/// Point estimate and variance components for one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AucEstimate {
    pub theta_hat: f64,
    pub tau10_hat: f64,
    pub tau01_hat: f64,
    pub m: usize,
    pub n: usize,
}

impl AucEstimate {
    pub fn from_data(data: &ScoreData) -> Self {
        let counts = PairCounts::new(data);
        let (tau10_hat, tau01_hat) = counts.taus();
        Self {
            theta_hat: counts.theta_hat(),
            tau10_hat,
            tau01_hat,
            m: data.m(),
            n: data.n(),
        }
    }

    /// Hoeffding asymptotic variance of `theta_hat` at these estimates.
    pub fn asymptotic_variance(&self) -> f64 {
        asymptotic_variance(self.tau10_hat, self.tau01_hat, self.m, self.n)
    }
}

/// Per-observation counts of strict `U > V` comparisons.
struct PairCounts {
    /// `#{j : U_i > V_j}` for each `i`
    above: Vec<u64>,
    /// `#{i : U_i > V_j}` for each `j`
    below: Vec<u64>,
}

impl PairCounts {
    fn new(data: &ScoreData) -> Self {
        let mut u = data.u.clone();
        let mut v = data.v.clone();
        u.sort_by(f64::total_cmp);
        v.sort_by(f64::total_cmp);
        let m = u.len() as u64;
        let above = data
            .u
            .iter()
            .map(|&x| v.partition_point(|&y| y < x) as u64)
            .collect();
        let below = data
            .v
            .iter()
            .map(|&y| m - u.partition_point(|&x| x <= y) as u64)
            .collect();
        Self { above, below }
    }

    fn m(&self) -> u64 {
        self.above.len() as u64
    }

    fn n(&self) -> u64 {
        self.below.len() as u64
    }

    fn theta_hat(&self) -> f64 {
        let pairs: u64 = self.above.iter().sum();
        pairs as f64 / (self.m() * self.n()) as f64
    }

    fn taus(&self) -> (f64, f64) {
        let (m, n) = (self.m(), self.n());
        let theta = self.theta_hat();
        // sum_i c_i (c_i - 1) = 2 * sum_i #{unordered j < j' both below U_i}
        let s10: u128 = self
            .above
            .iter()
            .map(|&c| (c as u128) * (c.saturating_sub(1) as u128))
            .sum();
        let s01: u128 = self
            .below
            .iter()
            .map(|&d| (d as u128) * (d.saturating_sub(1) as u128))
            .sum();
        let tau10 = s10 as f64 / ((m * n) as f64 * (n - 1) as f64) - theta * theta;
        let tau01 = s01 as f64 / ((n * m) as f64 * (m - 1) as f64) - theta * theta;
        (tau10, tau01)
    }
}

/// `(mn)^{-1} sum_i sum_j 1(U_i > V_j)`, the empirical-risk minimiser.
///
/// Sort-and-scan in `O((m + n) log(m + n))`; the pair count is accumulated
/// as an integer so the result is the exact rational rounded once.
pub fn mann_whitney(data: &ScoreData) -> f64 {
    PairCounts::new(data).theta_hat()
}

/// `(mn)^{-1} sum_i sum_j {theta - 1(U_i > V_j)}^2`, evaluated through the
/// identity `(theta - theta_hat)^2 + theta_hat (1 - theta_hat)`.
pub fn empirical_risk(theta: f64, data: &ScoreData) -> f64 {
    let t = mann_whitney(data);
    (theta - t) * (theta - t) + t * (1.0 - t)
}

/// `(tau10_hat, tau01_hat)`, the estimated covariances of overlapping pair
/// indicators.
///
/// The inner sums run over unordered pairs `j < j'` (resp. `i < i'`), each
/// counted once and scaled by `2 / (m n (n - 1))`, which is the pairwise
/// average of `1(U_i > V_j) 1(U_i > V_j')`.
pub fn tau_estimates(data: &ScoreData) -> Result<(f64, f64)> {
    if data.m() < 2 || data.n() < 2 {
        return Err(Error::TooFewScores {
            group: if data.m() < 2 { 1 } else { 0 },
            len: data.m().min(data.n()),
        });
    }
    Ok(PairCounts::new(data).taus())
}

/// `(m + n)^{-1} (tau10 / lambda + tau01 / (1 - lambda))` with
/// `lambda = m / (m + n)`. Negative inputs pass straight through.
pub fn asymptotic_variance(tau10: f64, tau01: f64, m: usize, n: usize) -> f64 {
    let total = (m + n) as f64;
    let lambda = m as f64 / total;
    (tau10 / lambda + tau01 / (1.0 - lambda)) / total
}
