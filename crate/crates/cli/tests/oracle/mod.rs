//! Independent reference implementations used by the acceptance suite.

/// Double-loop count of strict `u > v` pairs.
pub fn pair_count(u: &[f64], v: &[f64]) -> u64 {
    let mut c = 0;
    for &x in u {
        for &y in v {
            if x > y {
                c += 1;
            }
        }
    }
    c
}

pub fn theta(u: &[f64], v: &[f64]) -> f64 {
    pair_count(u, v) as f64 / (u.len() * v.len()) as f64
}

/// Empirical risk straight from its definition.
pub fn risk(t: f64, u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for &x in u {
        for &y in v {
            let ind = if x > y { 1.0 } else { 0.0 };
            s += (t - ind) * (t - ind);
        }
    }
    s / (u.len() * v.len()) as f64
}

/// Variance components from explicit loops over unordered index pairs.
pub fn taus(u: &[f64], v: &[f64]) -> (f64, f64) {
    let (m, n) = (u.len(), v.len());
    let th = theta(u, v);
    let mut s10 = 0u64;
    for &x in u {
        for j in 0..n {
            for k in j + 1..n {
                if x > v[j] && x > v[k] {
                    s10 += 1;
                }
            }
        }
    }
    let mut s01 = 0u64;
    for &y in v {
        for i in 0..m {
            for k in i + 1..m {
                if u[i] > y && u[k] > y {
                    s01 += 1;
                }
            }
        }
    }
    let t10 = (2 * s10) as f64 / ((m * n) as f64 * (n - 1) as f64) - th * th;
    let t01 = (2 * s01) as f64 / ((n * m) as f64 * (m - 1) as f64) - th * th;
    (t10, t01)
}

fn simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature over `[a, b]`, started from `panels` equal pieces.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize, tol: f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let (x0, x1) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let xm = 0.5 * (x0 + x1);
            let (f0, fm, f1) = (f(x0), f(xm), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson(f, x0, x1, f0, fm, f1, whole, tol / panels as f64, 50)
        })
        .sum()
}

/// Mean and variance of `N(mu, sigma^2)` restricted to `[0, 1]` by quadrature.
pub fn truncnorm_moments(mu: f64, sigma: f64) -> (f64, f64) {
    // density relative to its maximum on [0, 1]
    let peak = mu.clamp(0.0, 1.0);
    let g = move |x: f64| {
        (-((x - mu) * (x - mu) - (peak - mu) * (peak - mu)) / (2.0 * sigma * sigma)).exp()
    };
    // outside |x - mu| < r the relative density is below exp(-100)
    let r = ((peak - mu) * (peak - mu) + 200.0 * sigma * sigma).sqrt();
    let (lo, hi) = ((mu - r).max(0.0), (mu + r).min(1.0));
    // split at the peak so narrow interior modes are resolved
    let pieces: Vec<(f64, f64)> = if peak > lo && peak < hi {
        vec![(lo, peak), (peak, hi)]
    } else {
        vec![(lo, hi)]
    };
    let int = |f: &dyn Fn(f64) -> f64| -> f64 {
        pieces
            .iter()
            .map(|&(a, b)| integrate(f, a, b, 64, 1e-15))
            .sum()
    };
    let z = int(&g);
    let mean = int(&|x| x * g(x)) / z;
    let var = int(&|x| (x - mean) * (x - mean) * g(x)) / z;
    (mean, var)
}

/// Relative distance in units of the larger operand's ulp.
pub fn ulps(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / (a.abs().max(b.abs()) * f64::EPSILON)
}
