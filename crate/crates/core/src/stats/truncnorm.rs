use serde::{Deserialize, Serialize};

use super::normal::{
    gl_integrate, is_narrow, log_norm_interval_mass, log_norm_pdf, nearest_to_zero, norm_cdf,
    norm_sf, quantile_unchecked,
};
use super::rng::RngStream;
use crate::error::{Error, Result};

/// Standardised lower bound above which sampling switches to exponential
/// rejection.
const EXP_REJECTION_FROM: f64 = 5.0;
const MAX_RETRIES: usize = 64;

/// Normal `N(location, scale^2)` restricted to `[lower, upper]`.
///
/// Bounds may be infinite. Everything is computed on the standardised
/// bounds `A = (lower - location) / scale` and `B = (upper - location) / scale`,
/// with normalising masses kept in log space so that intervals deep in
/// either tail remain usable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormal {
    location: f64,
    scale: f64,
    lower: f64,
    upper: f64,
}

impl TruncatedNormal {
    pub fn new(location: f64, scale: f64, lower: f64, upper: f64) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::InvalidParameter {
                name: "location",
                value: location,
                reason: "must be finite",
            });
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: scale,
                reason: "must be positive and finite",
            });
        }
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidParameter {
                name: "lower",
                value: lower,
                reason: "lower bound must be below upper bound",
            });
        }
        Ok(Self {
            location,
            scale,
            lower,
            upper,
        })
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    fn standardize(&self, x: f64) -> f64 {
        (x - self.location) / self.scale
    }

    /// Standardised bounds `(A, B)`.
    pub fn standardized_bounds(&self) -> (f64, f64) {
        (self.standardize(self.lower), self.standardize(self.upper))
    }

    /// `ln(Phi(B) - Phi(A))`.
    pub fn log_normalizer(&self) -> f64 {
        let (a, b) = self.standardized_bounds();
        log_norm_interval_mass(a, b)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.lower || x > self.upper {
            return 0.0;
        }
        (log_norm_pdf(self.standardize(x)) - self.log_normalizer()).exp() / self.scale
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.mass(self.lower, x)
    }

    /// Probability of `[l, u]`, clipped to the support.
    pub fn mass(&self, l: f64, u: f64) -> f64 {
        let l = l.max(self.lower);
        let u = u.min(self.upper);
        if l >= u {
            return 0.0;
        }
        if l == self.lower && u == self.upper {
            return 1.0;
        }
        let (zl, zu) = (self.standardize(l), self.standardize(u));
        if zl >= zu {
            return 0.0;
        }
        (log_norm_interval_mass(zl, zu) - self.log_normalizer())
            .exp()
            .min(1.0)
    }

    /// Mean and variance.
    ///
    /// With `A`, `B` the standardised bounds and `Z = Phi(B) - Phi(A)`:
    ///
    /// ```text
    /// mean = mu + sigma (phi(A) - phi(B)) / Z
    /// var  = sigma^2 {1 + (A phi(A) - B phi(B)) / Z - [(phi(A) - phi(B)) / Z]^2}
    /// ```
    ///
    /// The ratios `phi / Z` are formed in log space. When the density is
    /// nearly flat across the interval those expressions cancel
    /// catastrophically, so the moments are integrated directly instead.
    pub fn moments(&self) -> (f64, f64) {
        let (a, b) = self.standardized_bounds();
        let (m, v) = if is_narrow(a, b) {
            narrow_moments(a, b)
        } else {
            let lz = log_norm_interval_mass(a, b);
            let ratio = |x: f64| {
                if x.is_finite() {
                    (log_norm_pdf(x) - lz).exp()
                } else {
                    0.0
                }
            };
            let (ra, rb) = (ratio(a), ratio(b));
            let shift = ra - rb;
            let ta = if ra == 0.0 { 0.0 } else { a * ra };
            let tb = if rb == 0.0 { 0.0 } else { b * rb };
            (shift, (1.0 + ta - tb - shift * shift).max(0.0))
        };
        (self.location + self.scale * m, self.scale * self.scale * v)
    }

    /// One draw from the open interval `(lower, upper)`.
    ///
    /// Errors with [`Error::DegenerateTruncation`] when no floating-point
    /// value lies strictly between the bounds.
    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        if self.lower.next_up() >= self.upper {
            return Err(Error::DegenerateTruncation {
                lower: self.lower,
                upper: self.upper,
            });
        }
        let (a, b) = self.standardized_bounds();
        if is_narrow(a, b) {
            return Ok(self.sample_narrow(a, b, rng));
        }
        for _ in 0..MAX_RETRIES {
            let z = sample_standard(a, b, rng);
            let x = self.location + self.scale * z;
            if x > self.lower && x < self.upper {
                return Ok(x);
            }
        }
        Err(Error::DegenerateTruncation {
            lower: self.lower,
            upper: self.upper,
        })
    }

    /// Uniform proposal on the original scale, so that intervals far narrower
    /// than `scale` keep their full floating-point resolution.
    fn sample_narrow(&self, a: f64, b: f64, rng: &mut RngStream) -> f64 {
        let near = nearest_to_zero(a, b);
        let width = self.upper - self.lower;
        loop {
            let x = self.lower + rng.uniform() * width;
            if !(x > self.lower && x < self.upper) {
                continue;
            }
            let z = self.standardize(x).clamp(a, b);
            if rng.uniform().ln() <= -0.5 * (z - near) * (z + near) {
                return x;
            }
        }
    }
}

fn narrow_moments(a: f64, b: f64) -> (f64, f64) {
    let c = nearest_to_zero(a, b);
    let g = |x: f64| (-0.5 * (x - c) * (x + c)).exp();
    let z = gl_integrate(a, b, g);
    let mean = gl_integrate(a, b, |x| x * g(x)) / z;
    let var = gl_integrate(a, b, |x| (x - mean) * (x - mean) * g(x)) / z;
    (mean, var)
}

/// Draw from `N(0, 1)` restricted to `[a, b]`.
fn sample_standard(a: f64, b: f64, rng: &mut RngStream) -> f64 {
    if b <= 0.0 {
        return -sample_standard(-b, -a, rng);
    }
    if is_narrow(a, b) {
        // Uniform proposal; the density ratio across the interval is at least e^-1.
        let near = nearest_to_zero(a, b);
        let width = b - a;
        loop {
            let x = (a + rng.uniform() * width).clamp(a, b);
            if rng.uniform().ln() <= -0.5 * (x - near) * (x + near) {
                return x;
            }
        }
    }
    if a >= EXP_REJECTION_FROM {
        // Translated-exponential proposal with the optimal rate, truncated at b.
        let rate = 0.5 * (a + (a * a + 4.0).sqrt());
        let tail_mass = -(-rate * (b - a)).exp_m1();
        loop {
            let t = if b.is_finite() {
                -(-rng.uniform() * tail_mass).ln_1p() / rate
            } else {
                rng.exponential() / rate
            };
            let x = (a + t).min(b);
            if rng.uniform().ln() <= -0.5 * (x - rate) * (x - rate) {
                return x;
            }
        }
    }
    let u = rng.uniform();
    let x = if a >= 0.0 {
        let (qa, qb) = (norm_sf(a), norm_sf(b));
        -quantile_unchecked(qb + (1.0 - u) * (qa - qb))
    } else {
        let (pa, pb) = (norm_cdf(a), norm_cdf(b));
        let p = pa + u * (pb - pa);
        if p < 0.5 {
            quantile_unchecked(p)
        } else {
            -quantile_unchecked(norm_sf(b) + (1.0 - u) * (pb - pa))
        }
    };
    x.clamp(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tn(mu: f64, s: f64, l: f64, u: f64) -> TruncatedNormal {
        TruncatedNormal::new(mu, s, l, u).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(TruncatedNormal::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(TruncatedNormal::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(TruncatedNormal::new(f64::NAN, 1.0, 0.0, 1.0).is_err());
        assert!(TruncatedNormal::new(0.0, 1.0, f64::NEG_INFINITY, f64::INFINITY).is_ok());
    }

    #[test]
    fn moments_reference_cases() {
        let (m, v) = tn(0.5, 0.1, 0.0, 1.0).moments();
        assert!((m - 0.5).abs() < 1e-10);
        assert!((v - 0.009_999_851_327_963_292).abs() < 1e-15);

        // half normal: mean sqrt(2/pi)
        let (m, _) = tn(0.0, 1.0, 0.0, 1e6).moments();
        assert!((m - 0.797_884_560_802_865_4).abs() < 1e-6);

        // mpmath quadrature: 0.94704264316928566, 0.0012842390624258237
        let (m, v) = tn(0.97, 0.05, 0.0, 1.0).moments();
        assert!((m - 0.947_042_643_169_285_7).abs() < 1e-8, "{m}");
        assert!((v - 0.001_284_239_062_425_823_7).abs() < 1e-8, "{v}");
    }

    #[test]
    fn moments_of_a_nearly_flat_window() {
        // scale far larger than the window: close to uniform on [0, 1]
        let (m, v) = tn(0.3, 1e6, 0.0, 1.0).moments();
        assert!((m - 0.5).abs() < 1e-9);
        assert!((v - 1.0 / 12.0).abs() < 1e-9);
    }

    #[test]
    fn moments_far_in_a_tail() {
        // [40, 41] standardised: mean close to 40 + 1/40, tiny variance
        let (m, v) = tn(0.0, 1.0, 40.0, 41.0).moments();
        assert!(m > 40.0 && m < 40.03, "{m}");
        assert!(v > 0.0 && v < 1e-3);
        let (m2, _) = tn(0.0, 1.0, -41.0, -40.0).moments();
        assert!((m + m2).abs() < 1e-12);
    }

    #[test]
    fn density_integrates_to_one() {
        for d in [
            tn(0.5, 0.1, 0.0, 1.0),
            tn(0.97, 0.05, 0.0, 1.0),
            tn(-3.0, 0.5, 0.0, 1.0),
        ] {
            let n = 200;
            let h = (d.upper() - d.lower()) / n as f64;
            let total: f64 = (0..n)
                .map(|k| {
                    let l = d.lower() + k as f64 * h;
                    gl_integrate(l, l + h, |x| d.pdf(x))
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-8, "{d:?} {total}");
        }
    }

    #[test]
    fn cdf_hits_the_ends() {
        let d = tn(0.2, 0.3, 0.0, 1.0);
        assert_eq!(d.cdf(0.0), 0.0);
        assert_eq!(d.cdf(1.0), 1.0);
        assert!(d.cdf(0.2) > 0.0 && d.cdf(0.2) < 1.0);
    }

    #[test]
    fn sample_effectively_untruncated_is_reproducible() {
        let d = tn(0.0, 1.0, -1e6, 1e6);
        let x = d.sample(&mut RngStream::new(3, 0)).unwrap();
        let y = d.sample(&mut RngStream::new(3, 0)).unwrap();
        assert_eq!(x, y);
        assert!(x > -1e6 && x < 1e6);
    }

    #[test]
    fn samples_respect_support() {
        let mut rng = RngStream::new(1, 1);
        let cases = [
            tn(0.0, 1.0, 5.0, 6.0),
            tn(0.0, 1.0, -6.0, -5.0),
            tn(0.0, 1.0, 50.0, f64::INFINITY),
            tn(0.0, 1.0, 3.0, 3.0 + 1e-9),
            tn(2.0, 0.5, -1.0, 2.5),
            tn(0.0, 1.0, -2.0, 30.0),
        ];
        for d in cases {
            for _ in 0..10_000 {
                let x = d.sample(&mut rng).unwrap();
                assert!(x > d.lower() && x < d.upper(), "{d:?} {x}");
            }
        }
    }

    #[test]
    fn sample_mean_matches_moments() {
        let d = tn(0.5, 0.1, 0.0, 1.0);
        let mut rng = RngStream::new(11, 0);
        let n = 100_000;
        let mean = (0..n).map(|_| d.sample(&mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.001);
    }

    #[test]
    fn tiny_window_under_a_huge_scale() {
        let d = tn(2.4e15, 1.7e16, 1.5, 1.99);
        let mut rng = RngStream::new(5, 0);
        for _ in 0..1000 {
            let x = d.sample(&mut rng).unwrap();
            assert!(x > 1.5 && x < 1.99);
        }
    }

    #[test]
    fn degenerate_interval_is_an_error() {
        let l = 1.0f64;
        let d = tn(0.0, 1.0, l, l.next_up());
        assert!(matches!(
            d.sample(&mut RngStream::new(0, 0)),
            Err(Error::DegenerateTruncation { .. })
        ));
    }
}
