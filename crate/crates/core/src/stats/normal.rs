//! Standard normal density, distribution and quantile functions.
//!
//! The distribution function is built from a scaled complementary error
//! function `erfcx(z) = exp(z^2) erfc(z)`: a positive-term power series
//! below `z = 2` and a Lentz continued fraction above. Working with the
//! scaled form keeps the lower tail accurate in relative terms all the way
//! out, and gives log-probabilities that never underflow.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// `1 / sqrt(2 pi)`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// `ln(sqrt(2 pi))`.
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SERIES_CUTOFF: f64 = 2.0;

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Natural log of the standard normal density.
pub fn log_norm_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Scaled complementary error function for `z >= 0`.
fn erfcx_nonneg(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < SERIES_CUTOFF {
        // erf(z) = 2/sqrt(pi) e^{-z^2} sum_n 2^n z^{2n+1} / (2n+1)!!
        let z2 = z * z;
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= 2.0 * z2 / (2.0 * n + 1.0);
            sum += term;
            if term <= 1e-17 * sum {
                break;
            }
        }
        z2.exp() - FRAC_2_SQRT_PI * sum
    } else if z.is_infinite() {
        0.0
    } else {
        // erfc(z) = e^{-z^2}/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
        const TINY: f64 = 1e-300;
        let mut f = z;
        let mut c = z;
        let mut d = 0.0;
        let mut k = 1.0;
        loop {
            let a = 0.5 * k;
            d = z + a * d;
            if d == 0.0 {
                d = TINY;
            }
            d = 1.0 / d;
            c = z + a / c;
            if c == 0.0 {
                c = TINY;
            }
            let delta = c * d;
            f *= delta;
            k += 1.0;
            if (delta - 1.0).abs() < 1e-16 || k > 5000.0 {
                break;
            }
        }
        1.0 / (PI.sqrt() * f)
    }
}

/// `Phi(x)` for `x <= 0`, computed without cancellation.
fn lower_tail(x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * erfcx_nonneg(-x * FRAC_1_SQRT_2) * (-0.5 * x * x).exp()
}

/// `ln Phi(x)` for `x <= 0`.
fn log_lower_tail(x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    if x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    (0.5 * erfcx_nonneg(-x * FRAC_1_SQRT_2)).ln() - 0.5 * x * x
}

/// Standard normal distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        lower_tail(x)
    } else {
        1.0 - lower_tail(-x)
    }
}

/// Standard normal survival function `1 - Phi(x)`, accurate in the upper tail.
pub fn norm_sf(x: f64) -> f64 {
    norm_cdf(-x)
}

/// `ln Phi(x)`; finite for every finite `x`.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        log_lower_tail(x)
    } else {
        (-lower_tail(-x)).ln_1p()
    }
}

/// `ln(1 - Phi(x))`.
pub fn log_norm_sf(x: f64) -> f64 {
    log_norm_cdf(-x)
}

/// Mills ratio `(1 - Phi(x)) / phi(x)` for `x >= 0`.
pub fn mills_ratio(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    0.5 * erfcx_nonneg(x * FRAC_1_SQRT_2) / INV_SQRT_2PI
}

/// Standard normal quantile function.
///
/// Errors unless `0 < p < 1`.
pub fn norm_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "probability must lie strictly inside (0, 1)",
        });
    }
    Ok(quantile_unchecked(p))
}

/// Quantile for `p` already known to be in `(0, 1)`.
///
/// Acklam's rational approximation followed by one Halley step against
/// [`norm_cdf`], which brings the result to working precision.
pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let tail = |q: f64| {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    };
    let x = if p < P_LOW {
        tail(p)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail(1.0 - p)
    };

    // Halley refinement. For p > 1/2 the residual is formed from upper-tail
    // quantities; 1 - p is exact there.
    let e = if p <= 0.5 {
        norm_cdf(x) - p
    } else {
        (1.0 - p) - norm_sf(x)
    };
    if e == 0.0 {
        return x;
    }
    let u = e.signum() * (e.abs().ln() - log_norm_pdf(x)).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Gauss–Legendre rule on `[-1, 1]`.
fn gauss_legendre() -> &'static [(f64, f64)] {
    const ORDER: usize = 20;
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER as f64;
        (0..ORDER)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=ORDER {
                        let k = k as f64;
                        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

/// Integrates `g` over `[a, b]` with the fixed Gauss–Legendre rule.
pub(crate) fn gl_integrate(a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    half * gauss_legendre()
        .iter()
        .map(|&(t, w)| w * g(mid + half * t))
        .sum::<f64>()
}

/// Closest point of `[a, b]` to the origin.
pub(crate) fn nearest_to_zero(a: f64, b: f64) -> f64 {
    0.0f64.clamp(a, b)
}

/// True when the density varies by at most a factor `e` across `[a, b]`.
pub(crate) fn is_narrow(a: f64, b: f64) -> bool {
    if !(a.is_finite() && b.is_finite()) {
        return false;
    }
    let c = nearest_to_zero(a, b);
    let far = a.abs().max(b.abs());
    0.5 * (far - c.abs()) * (far + c.abs()) <= 1.0
}

/// `ln(Phi(b) - Phi(a))` for `a < b`, stable in both tails and for narrow
/// intervals.
pub fn log_norm_interval_mass(a: f64, b: f64) -> f64 {
    debug_assert!(a < b);
    if is_narrow(a, b) {
        // phi(x) = phi(c) exp(-(x - c)(x + c)/2), integrand bounded in [e^-1, 1]
        let c = nearest_to_zero(a, b);
        let integral = gl_integrate(a, b, |x| (-0.5 * (x - c) * (x + c)).exp());
        return log_norm_pdf(c) + integral.ln();
    }
    if a >= 0.0 {
        let la = log_norm_sf(a);
        let lb = log_norm_sf(b);
        la + (-(lb - la).exp_m1()).ln()
    } else if b <= 0.0 {
        let lb = log_norm_cdf(b);
        let la = log_norm_cdf(a);
        lb + (-(la - lb).exp_m1()).ln()
    } else {
        (-(norm_cdf(a) + norm_sf(b))).ln_1p()
    }
}

/// `Phi(b) - Phi(a)` for `a < b`.
pub fn norm_interval_mass(a: f64, b: f64) -> f64 {
    log_norm_interval_mass(a, b).exp()
}
