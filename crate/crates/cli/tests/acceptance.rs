//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. The
//! real-data half of criterion 10 needs the CA-125 file; point
//! `GIBBS_AUC_CA125` at the output of `scripts/fetch_ca125.sh` to run it.

mod oracle;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use gibbs_auc::auc::{
    asymptotic_variance, empirical_risk, mann_whitney, tau_estimates, AucEstimate,
};
use gibbs_auc::calibrate::CalibrationConfig;
use gibbs_auc::gibbs::{analytic_learning_rate, GibbsPosterior};
use gibbs_auc::harness::analyze::{fit_gibbs, GibbsFitConfig, OmegaChoice};
use gibbs_auc::harness::data::read_data_file;
use gibbs_auc::harness::study::{
    log_log_slope, omega_study, run_cell, summarize_cell, BiasMode, Method, OmegaStudyConfig,
    StudyConfig,
};
use gibbs_auc::harness::{true_auc, Scenario};
use gibbs_auc::{Prior, RngStream, ScoreData, TruncatedNormal};

enum Verdict {
    Pass,
    Fail,
    Unverified,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

fn judge(ok: bool, detail: String) -> Outcome {
    Outcome {
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        detail,
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn random_data(rng: &mut RngStream, max: usize, integer: bool) -> ScoreData {
    let m = 2 + rng.index(max - 1);
    let n = 2 + rng.index(max - 1);
    let mut draw = |shift: f64| {
        let x = rng.standard_normal() + shift;
        if integer {
            (2.0 * x).round()
        } else {
            x
        }
    };
    let u: Vec<f64> = (0..m).map(|_| draw(0.8)).collect();
    let v: Vec<f64> = (0..n).map(|_| draw(0.0)).collect();
    ScoreData::new(u, v).unwrap()
}

fn closed_forms() -> Outcome {
    let mut rng = RngStream::new(101, 0);
    let mut worst: f64 = 0.0;
    let mut flat_mu_exact = true;
    for _ in 0..1000 {
        let m = 2 + rng.index(199);
        let n = 2 + rng.index(199);
        let mn = (m * n) as f64;
        let theta_hat = rng.index(m * n + 1) as f64 / mn;
        let omega = (rng.uniform() * 11.5 - 7.0).exp();
        let flat = GibbsPosterior::from_estimate(theta_hat, m, n, Prior::Flat, omega).unwrap();
        flat_mu_exact &= flat.mu_mn == theta_hat;
        worst = worst.max(oracle::ulps(flat.sigma_mn, 1.0 / (2.0 * omega * mn).sqrt()));

        let mu0 = rng.uniform() * 3.0 - 1.0;
        let s0 = 0.05 + 3.0 * rng.uniform();
        let prior = Prior::truncated_normal(mu0, s0).unwrap();
        let p = GibbsPosterior::from_estimate(theta_hat, m, n, prior, omega).unwrap();
        let k = 2.0 * omega * s0 * s0 * mn;
        let mu = (mu0 + k * theta_hat) / (1.0 + k);
        let sigma = (s0 * s0 / (1.0 + k)).sqrt();
        worst = worst
            .max(oracle::ulps(p.mu_mn, mu))
            .max(oracle::ulps(p.sigma_mn, sigma));
    }
    judge(
        flat_mu_exact && worst <= 4.0,
        format!("1000 draws, flat mean identical: {flat_mu_exact}, worst deviation {worst} ulp (limit 4)"),
    )
}

fn brute_force() -> Outcome {
    let mut rng = RngStream::new(202, 0);
    let mut mismatches = 0;
    let mut risk_err: f64 = 0.0;
    for k in 0..50 {
        let d = random_data(&mut rng, 12, k % 2 == 0);
        if mann_whitney(&d) != oracle::theta(d.u(), d.v()) {
            mismatches += 1;
        }
        if tau_estimates(&d).unwrap() != oracle::taus(d.u(), d.v()) {
            mismatches += 1;
        }
        for t in [0.0, 0.3, mann_whitney(&d), 1.0] {
            risk_err = risk_err.max((empirical_risk(t, &d) - oracle::risk(t, d.u(), d.v())).abs());
        }
    }
    judge(
        mismatches == 0 && risk_err <= 1e-15,
        format!("50 datasets (half with ties): {mismatches} estimate/tau mismatches, max risk error {risk_err:.1e} (limit 1e-15)"),
    )
}

fn omega_identity() -> Outcome {
    let mut rng = RngStream::new(303, 0);
    let (mut defined, mut worst) = (0, 0.0f64);
    for k in 0..500 {
        let d = random_data(&mut rng, 60, k % 3 == 0);
        let Ok(w) = analytic_learning_rate(&d) else {
            continue;
        };
        defined += 1;
        let (t10, t01) = tau_estimates(&d).unwrap();
        let lhs = 1.0 / (2.0 * w * (d.m() * d.n()) as f64);
        worst = worst.max(oracle::ulps(
            lhs,
            asymptotic_variance(t10, t01, d.m(), d.n()),
        ));
        let e = AucEstimate::from_data(&d);
        worst = worst.max(oracle::ulps(lhs, e.asymptotic_variance()));
    }
    judge(
        defined > 100 && worst <= 4.0,
        format!("{defined} datasets with a defined rate, worst deviation {worst} ulp (limit 4)"),
    )
}

fn moments() -> Outcome {
    let mut rng = RngStream::new(404, 0);
    let mut cases = Vec::new();
    for k in 0..100 {
        let sigma = (rng.uniform() * 7.6 - 6.9).exp(); // 1e-3 .. 2
        let mu = match k % 4 {
            0 => rng.uniform() * 2.0 - 0.5,
            1 => rng.uniform() * 6.0 * sigma - 3.0 * sigma,
            2 => 1.0 + rng.uniform() * 6.0 * sigma - 3.0 * sigma,
            _ => 1.0 + sigma * (3.0 + 20.0 * rng.uniform()),
        };
        cases.push((mu, sigma));
    }
    cases.extend([
        (-0.2, 0.01),
        (1.3, 0.02),
        (0.5, 1e-3),
        (0.0, 0.05),
        (1.0, 50.0),
    ]);
    let mut worst: f64 = 0.0;
    for &(mu, sigma) in &cases {
        let (m, v) = TruncatedNormal::new(mu, sigma, 0.0, 1.0).unwrap().moments();
        let (mq, vq) = oracle::truncnorm_moments(mu, sigma);
        worst = worst.max((m - mq).abs()).max((v - vq).abs());
    }
    judge(
        worst <= 1e-8,
        format!(
            "{} cases, max |error| {worst:.2e} (limit 1e-8)",
            cases.len()
        ),
    )
}

fn example1_gibbs() -> Outcome {
    let cfg = StudyConfig::desk();
    let reps = run_cell(Scenario::Ex1, 100, Method::Gibbs, 200, &cfg, 5).unwrap();
    let r = summarize_cell(
        Scenario::Ex1,
        100,
        Method::Gibbs,
        &reps,
        BiasMode::AbsoluteOfMean,
        5,
    );
    let ok = r.bias <= 0.01
        && (0.013..=0.023).contains(&r.avg_posterior_sd)
        && (0.89..=0.98).contains(&r.coverage);
    judge(
        ok,
        format!(
            "Example 1, n=100, 200 reps, B=200: bias {:.4} (<= 0.01), SD {:.4} (0.013..0.023), coverage {:.3} (0.89..0.98)",
            r.bias, r.avg_posterior_sd, r.coverage
        ),
    )
}

fn example4_brl() -> Outcome {
    let cfg = StudyConfig::desk();
    let g = run_cell(Scenario::Ex4, 125, Method::Gibbs, 200, &cfg, 6).unwrap();
    let b = run_cell(Scenario::Ex4, 125, Method::Brl, 200, &cfg, 6).unwrap();
    let g = summarize_cell(
        Scenario::Ex4,
        125,
        Method::Gibbs,
        &g,
        BiasMode::AbsoluteOfMean,
        6,
    );
    let b = summarize_cell(
        Scenario::Ex4,
        125,
        Method::Brl,
        &b,
        BiasMode::AbsoluteOfMean,
        6,
    );
    judge(
        b.coverage < 0.90 && g.coverage >= 0.90,
        format!(
            "Example 4, n=125, 200 reps: BRL coverage {:.3} (< 0.90), Gibbs coverage {:.3} (>= 0.90)",
            b.coverage, g.coverage
        ),
    )
}

fn omega_trend() -> Outcome {
    let grid = [25, 50, 75, 100, 125];
    let cfg = OmegaStudyConfig::desk();
    let mut ok = true;
    let mut parts = Vec::new();
    for scenario in Scenario::ALL {
        let rows = omega_study(scenario, &grid, 200, &cfg, 7).unwrap();
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.omega_oracle)).collect();
        let slope = log_log_slope(&pts).unwrap();
        let gap = rows
            .iter()
            .map(|r| (r.median_omega_hat().unwrap() / r.omega_oracle).ln().abs())
            .fold(0.0, f64::max);
        ok &= (-1.3..=-0.7).contains(&slope) && gap <= 0.7;
        parts.push(format!(
            "Ex{} slope {slope:.3} max|log gap| {gap:.3}",
            scenario.number()
        ));
    }
    judge(
        ok,
        format!("{} (slope in [-1.3,-0.7], gap <= 0.7)", parts.join("; ")),
    )
}

fn true_aucs() -> Outcome {
    let expected = [0.9214, 0.9665, 0.8185, 0.7895];
    let rounded_ok = Scenario::ALL
        .iter()
        .zip(expected)
        .all(|(&s, e)| ((true_auc(s) * 1e4).round() / 1e4 - e).abs() < 1e-12);
    let mut rng = RngStream::new(808, 0);
    let reps = 10_000_000u64;
    let wins = (0..reps)
        .filter(|_| Scenario::Ex2.sample_u(&mut rng) > Scenario::Ex2.sample_v(&mut rng))
        .count();
    let mc = wins as f64 / reps as f64;
    judge(
        rounded_ok && (mc - true_auc(Scenario::Ex2)).abs() <= 0.0005,
        format!(
            "4-dp values {:.4}/{:.4}/{:.4}/{:.4}, Example 2 Monte Carlo {mc:.5} vs {:.5} (+-0.0005)",
            true_auc(Scenario::Ex1),
            true_auc(Scenario::Ex2),
            true_auc(Scenario::Ex3),
            true_auc(Scenario::Ex4),
            true_auc(Scenario::Ex2)
        ),
    )
}

fn brl_under_truth() -> Outcome {
    let cfg = StudyConfig::desk();
    let reps = run_cell(Scenario::Ex1, 50, Method::Brl, 200, &cfg, 9).unwrap();
    let violations: usize = reps.iter().map(|r| r.rank_violations.unwrap()).sum();
    let r = summarize_cell(
        Scenario::Ex1,
        50,
        Method::Brl,
        &reps,
        BiasMode::AbsoluteOfMean,
        9,
    );
    judge(
        r.bias <= 0.02 && violations == 0,
        format!(
            "Example 1, n=50, 200 chains of {} sweeps: bias {:.4} (<= 0.02), rank violations {violations}",
            cfg.brl.n_samples, r.bias
        ),
    )
}

fn golden_json() -> Outcome {
    let data = read_data_file(fixture("synthetic10.csv")).unwrap();
    let cfg = GibbsFitConfig {
        omega: OmegaChoice::Analytic,
        ..GibbsFitConfig::default()
    };
    let (report, _) = fit_gibbs(&data, "Gibbs", &cfg, 0).unwrap();
    let produced = serde_json::to_string_pretty(&report).unwrap() + "\n";
    let expected = std::fs::read_to_string(fixture("synthetic10_fit.json")).unwrap();
    judge(
        produced == expected,
        format!(
            "synthetic fixture JSON byte-identical: {}",
            produced == expected
        ),
    )
}

fn ca125() -> Outcome {
    match std::env::var_os("GIBBS_AUC_CA125") {
        None => Outcome {
            verdict: Verdict::Unverified,
            detail: "CA-125 data not available (set GIBBS_AUC_CA125 to the fetched CSV)".into(),
        },
        Some(path) => {
            let cfg = GibbsFitConfig {
                calibration: CalibrationConfig::default(),
                ..GibbsFitConfig::default()
            };
            let fitted = read_data_file(&path).and_then(|data| {
                let (r, _) = fit_gibbs(&data, "Gibbs1", &cfg, 0)?;
                Ok((data, r))
            });
            let (data, r) = match fitted {
                Ok(x) => x,
                Err(e) => return judge(false, format!("CA-125 pipeline failed: {e}")),
            };
            let w = r.learning_rate.unwrap_or(f64::NAN);
            judge(
                (r.posterior_mean - 0.705).abs() <= 0.01 && (0.03..=0.08).contains(&w),
                format!(
                    "m={}, n={}: posterior mean {:.4} (0.705 +- 0.01), learning rate {w:.4} (0.03..0.08)",
                    data.m(),
                    data.n(),
                    r.posterior_mean
                ),
            )
        }
    }
}

fn properties() -> Outcome {
    use gibbs_auc::brl::{brl_run, BrlChain, BrlConfig, BrlInit};
    use gibbs_auc::calibrate::{bootstrap_set, coverage_estimate};
    use gibbs_auc::harness::generate;
    use gibbs_auc::stats::ranks;

    let mut failures = Vec::new();

    // posterior tail mass beyond K_n n^-1/2 with K_n = c log n, fixed learning rate
    let grid = [25usize, 50, 100, 200];
    let ks = [0.05, 0.1, 0.2];
    let reps = 400;
    let mut tails = vec![vec![0.0; grid.len()]; ks.len()];
    for (gi, &n) in grid.iter().enumerate() {
        let base = RngStream::new(1111, n as u64);
        for r in 0..reps {
            let d = generate(Scenario::Ex1, n, n, &mut base.substream(r)).unwrap();
            let post = gibbs_auc::gibbs::build_posterior(&d, Prior::Flat, 1.0)
                .unwrap()
                .distribution();
            for (ki, &c) in ks.iter().enumerate() {
                let t = c * (n as f64).ln() / (n as f64).sqrt();
                let star = Scenario::Ex1.theta_star();
                tails[ki][gi] += (1.0 - post.mass(star - t, star + t)).max(0.0) / reps as f64;
            }
        }
    }
    for row in &tails {
        if !row.windows(2).all(|w| w[1] <= w[0] + 1e-12) {
            failures.push(format!("tail mass not decreasing in n: {row:.4?}"));
        }
    }
    for gi in 0..grid.len() {
        if !(0..ks.len() - 1).all(|ki| tails[ki + 1][gi] <= tails[ki][gi]) {
            failures.push(format!("tail mass not decreasing in K at n={}", grid[gi]));
        }
    }

    // coverage against omega
    let mut rng = RngStream::new(1212, 0);
    for _ in 0..5 {
        let d = random_data(&mut rng, 40, false);
        let boot = bootstrap_set(&d, 200, rng.index(1000) as u64);
        let th = mann_whitney(&d);
        let mut prev = 1.0;
        for k in -30..=30 {
            let c =
                coverage_estimate(&boot, th, (k as f64 / 3.0).exp(), 0.05, Prior::Flat).unwrap();
            if c > prev {
                failures.push(format!(
                    "coverage increased at log omega {}",
                    k as f64 / 3.0
                ));
            }
            prev = c;
        }
    }

    // rank preservation through every sweep
    for s in 0..10u64 {
        let d = random_data(&mut rng, 30, false);
        let mut chain = BrlChain::new(&d, BrlInit::NormalScores, RngStream::new(s, 3)).unwrap();
        for _ in 0..200 {
            if let Err(err) = chain.sweep() {
                failures.push(format!("BRL chain failed: {err}"));
                break;
            }
            let latent: Vec<f64> = chain.w().iter().chain(chain.z()).copied().collect();
            if ranks(&latent).unwrap() != chain.rank_target() {
                failures.push("rank constraint broken".into());
            }
        }
    }

    // monotone-transform invariance
    let cfg = BrlConfig {
        n_samples: 500,
        burn_in: 100,
        ..BrlConfig::desk()
    };
    for s in 0..5u64 {
        let d = random_data(&mut rng, 25, false);
        let e = d.map(f64::exp).unwrap();
        let c = d.map(|x| x * x * x + x).unwrap();
        if mann_whitney(&e) != mann_whitney(&d) || mann_whitney(&c) != mann_whitney(&d) {
            failures.push("estimate changed under a monotone map".into());
        }
        match (
            brl_run(&d, &cfg, RngStream::new(s, 0)),
            brl_run(&e, &cfg, RngStream::new(s, 0)),
        ) {
            (Ok(x), Ok(y)) if x == y => {}
            (Ok(_), Ok(_)) => failures.push("BRL draws changed under exp".into()),
            (Err(err), _) | (_, Err(err)) => failures.push(format!("BRL chain failed: {err}")),
        }
    }

    let detail = if failures.is_empty() {
        format!(
            "tail masses (c=0.1) {:.4?}; coverage monotone; ranks preserved; invariance holds",
            tails[1]
        )
    } else {
        failures.join("; ")
    };
    judge(failures.is_empty(), detail)
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: &str, title: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let tag = match o.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                failed += 1;
                "FAIL"
            }
            Verdict::Unverified => "UNVERIFIED",
        };
        println!(
            "[{tag}] criterion {id} {title}: {} ({:.1}s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
    };
    report("1", "closed-form posterior", &closed_forms);
    report("2", "brute-force equivalence", &brute_force);
    report("3", "analytic rate identity", &omega_identity);
    report("4", "truncated-normal moments", &moments);
    report("5", "Example 1 Gibbs desk study", &example1_gibbs);
    report("6", "Example 4 BRL undercoverage", &example4_brl);
    report("7", "oracle learning-rate trend", &omega_trend);
    report("8", "true AUC constants", &true_aucs);
    report("9", "BRL under a binormal truth", &brl_under_truth);
    report("10a", "CA-125 pipeline", &ca125);
    report("10b", "synthetic fixture golden JSON", &golden_json);
    report("11", "property suite", &properties);
    if failed == 0 {
        println!("acceptance: all verifiable criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
