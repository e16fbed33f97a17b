use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gibbs_auc::brl::{BrlConfig, BrlInit};
use gibbs_auc::calibrate::{calibrate, CalibrationConfig, OmegaInit};
use gibbs_auc::harness::analyze::{fit_brl, fit_gibbs, GibbsFitConfig, OmegaChoice};
use gibbs_auc::harness::data::read_data_file;
use gibbs_auc::harness::report::{self, ReportDoc};
use gibbs_auc::harness::study::{
    omega_study, run_study, write_omega_csv, BiasMode, Method, OmegaStudyConfig, StudyConfig,
    DESK_REPLICATIONS, FULL_REPLICATIONS,
};
use gibbs_auc::harness::{analyze_data, AnalysisConfig, Scenario};
use gibbs_auc::{Error, Prior};

#[derive(Parser)]
#[command(
    name = "gibbs-auc",
    version,
    about = "Gibbs posterior and rank-likelihood inference for the AUC"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the Gibbs posterior to a score file
    Fit(FitArgs),
    /// Calibrate the learning rate and print the iteration trace
    Calibrate(CalibrateArgs),
    /// Run the rank-likelihood sampler on a score file
    Brl(BrlArgs),
    /// Compare two Gibbs posteriors and two BRL chains on a score file
    Analyze(AnalyzeArgs),
    /// Replication study on a simulation scenario
    Simulate(SimulateArgs),
    /// Calibrated learning rates against the oracle rate
    OmegaStudy(OmegaStudyArgs),
    /// Render a JSON result file as text tables
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write to this file instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    file: PathBuf,
    /// `flat` or `truncnorm:LOC,SCALE`
    #[arg(long, default_value = "flat", value_parser = parse_prior)]
    prior: Prior,
    /// A positive number, `analytic`, or `calibrate`
    #[arg(long, default_value = "calibrate", value_parser = parse_omega)]
    omega: OmegaChoice,
    /// With `--omega analytic`, calibrate when the variance estimate is not positive
    #[arg(long)]
    fallback: bool,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bootstrap samples used if calibration runs
    #[arg(long = "B", default_value_t = 1000)]
    bootstrap: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CalibrateArgs {
    file: PathBuf,
    #[arg(long, default_value = "flat", value_parser = parse_prior)]
    prior: Prior,
    #[arg(long = "B", default_value_t = 1000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long = "kappa-exp", default_value_t = 0.51)]
    kappa_exp: f64,
    #[arg(long = "max-iter", default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Starting learning rate; the analytic rate (or 1) when omitted
    #[arg(long = "omega-init")]
    omega_init: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct BrlArgs {
    file: PathBuf,
    /// Total sweeps including burn-in
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    #[arg(long, default_value_t = 4_000)]
    burnin: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    /// Initial `a,b2`; normal scores when omitted
    #[arg(long, value_parser = parse_init)]
    init: Option<BrlInit>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "B", default_value_t = 1000)]
    bootstrap: usize,
    /// Total BRL sweeps per chain
    #[arg(long = "brl-samples", default_value_t = 300_000)]
    brl_samples: usize,
    #[arg(long = "brl-burnin", default_value_t = 5_000)]
    brl_burnin: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Gibbs,
    Brl,
    Both,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario number 1..4
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    scenario: u8,
    #[arg(
        long = "n-grid",
        value_delimiter = ',',
        default_value = "25,50,75,100,125"
    )]
    n_grid: Vec<usize>,
    /// Replications per cell (200, or 1000 with --full)
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    method: MethodArg,
    /// Full-scale bootstrap and chain lengths
    #[arg(long)]
    full: bool,
    /// Report the mean absolute deviation instead of the absolute mean deviation
    #[arg(long = "mean-abs-bias")]
    mean_abs_bias: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OmegaStudyArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=4))]
    scenario: u8,
    #[arg(
        long = "n-grid",
        value_delimiter = ',',
        default_value = "25,50,75,100,125"
    )]
    n_grid: Vec<usize>,
    /// Calibration replications per n
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Datasets per oracle rate
    #[arg(long = "oracle-reps")]
    oracle_reps: Option<usize>,
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write plot data (n,source,omega) to this CSV file
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON written by any other subcommand
    file: PathBuf,
}

fn parse_prior(s: &str) -> Result<Prior, String> {
    if s == "flat" {
        return Ok(Prior::Flat);
    }
    let rest = s
        .strip_prefix("truncnorm:")
        .ok_or_else(|| format!("expected `flat` or `truncnorm:LOC,SCALE`, got `{s}`"))?;
    let (loc, scale) = parse_pair(rest)?;
    Prior::truncated_normal(loc, scale).map_err(|e| e.to_string())
}

fn parse_omega(s: &str) -> Result<OmegaChoice, String> {
    match s {
        "analytic" => Ok(OmegaChoice::Analytic),
        "calibrate" => Ok(OmegaChoice::Calibrate),
        _ => match s.parse::<f64>() {
            Ok(w) if w > 0.0 && w.is_finite() => Ok(OmegaChoice::Value(w)),
            _ => Err(format!(
                "expected a positive number, `analytic` or `calibrate`, got `{s}`"
            )),
        },
    }
}

fn parse_init(s: &str) -> Result<BrlInit, String> {
    let (a0, b2_0) = parse_pair(s)?;
    Ok(BrlInit::Custom { a0, b2_0 })
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated numbers, got `{s}`"))?;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{t}` is not a number"))
    };
    Ok((num(x)?, num(y)?))
}

/// Failure with its exit code: 2 for input problems, 3 for numerical ones.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn emit(
    out: &OutputArgs,
    json: impl FnOnce() -> String,
    text: impl FnOnce() -> String,
) -> Result<(), Failure> {
    let mut body = match out.format {
        Format::Json => json(),
        Format::Text => text(),
    };
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match &out.output {
        Some(path) => fs::write(path, body)?,
        None => io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("results serialise to JSON")
}

fn read(path: &Path) -> Result<gibbs_auc::ScoreData, Failure> {
    Ok(read_data_file(path)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Fit(a) => {
            let data = read(&a.file)?;
            let omega = match (a.omega, a.fallback) {
                (OmegaChoice::Analytic, true) => OmegaChoice::AnalyticOrCalibrate,
                (o, _) => o,
            };
            let cfg = GibbsFitConfig {
                prior: a.prior,
                omega,
                alpha: a.alpha,
                calibration: CalibrationConfig {
                    bootstrap_samples: a.bootstrap,
                    ..CalibrationConfig::default()
                },
            };
            let (r, _) = fit_gibbs(&data, "Gibbs", &cfg, a.seed)?;
            emit(
                &a.out,
                || to_json(&r),
                || report::method_table(std::slice::from_ref(&r)),
            )
        }
        Command::Calibrate(a) => {
            let data = read(&a.file)?;
            let cfg = CalibrationConfig {
                bootstrap_samples: a.bootstrap,
                alpha: a.alpha,
                epsilon: a.epsilon,
                kappa_exponent: a.kappa_exp,
                omega_init: a.omega_init.map_or(OmegaInit::Auto, OmegaInit::Value),
                max_iterations: a.max_iter,
                seed: a.seed,
            };
            let trace = calibrate(&data, a.prior, &cfg)?;
            emit(
                &a.out,
                || to_json(&trace),
                || {
                    let mut s = format!(
                        "{:>6} {:>14} {:>10} {:>10}\n",
                        "t", "omega", "coverage", "delta"
                    );
                    for it in &trace.iterates {
                        s.push_str(&format!(
                            "{:>6} {:>14.6} {:>10.4} {:>10.4}\n",
                            it.t, it.omega, it.coverage, it.delta
                        ));
                    }
                    s.push_str(&format!(
                        "omega_hat = {:.6} ({})\n",
                        trace.omega_hat,
                        if trace.converged {
                            "converged"
                        } else {
                            "not converged"
                        }
                    ));
                    s
                },
            )
        }
        Command::Brl(a) => {
            let data = read(&a.file)?;
            let cfg = BrlConfig {
                n_samples: a.samples,
                burn_in: a.burnin,
                thin: a.thin,
                init: a.init.unwrap_or(BrlInit::NormalScores),
            };
            let r = fit_brl(&data, "BRL", &cfg, a.level, a.seed)?;
            emit(
                &a.out,
                || to_json(&r),
                || report::method_table(std::slice::from_ref(&r)),
            )
        }
        Command::Analyze(a) => {
            let data = read(&a.file)?;
            let mut cfg = AnalysisConfig::default();
            for g in [&mut cfg.gibbs1, &mut cfg.gibbs2] {
                g.calibration.bootstrap_samples = a.bootstrap;
            }
            for b in [&mut cfg.brl1, &mut cfg.brl2] {
                b.n_samples = a.brl_samples;
                b.burn_in = a.brl_burnin;
            }
            let r = analyze_data(&data, &cfg, a.seed)?;
            emit(&a.out, || to_json(&r), || report::analysis_table(&r))
        }
        Command::Simulate(a) => {
            let scenario = Scenario::from_number(a.scenario)?;
            let mut cfg = if a.full {
                StudyConfig::full()
            } else {
                StudyConfig::desk()
            };
            if a.mean_abs_bias {
                cfg.bias_mode = BiasMode::MeanOfAbsolute;
            }
            let reps = a.reps.unwrap_or(if a.full {
                FULL_REPLICATIONS
            } else {
                DESK_REPLICATIONS
            });
            let methods: &[Method] = match a.method {
                MethodArg::Gibbs => &[Method::Gibbs],
                MethodArg::Brl => &[Method::Brl],
                MethodArg::Both => &[Method::Gibbs, Method::Brl],
            };
            let mut results = Vec::new();
            for &m in methods {
                results.extend(run_study(scenario, &a.n_grid, m, reps, &cfg, a.seed)?);
            }
            emit(
                &a.out,
                || to_json(&results),
                || report::study_tables(&results),
            )
        }
        Command::OmegaStudy(a) => {
            let scenario = Scenario::from_number(a.scenario)?;
            let mut cfg = if a.full {
                OmegaStudyConfig::full()
            } else {
                OmegaStudyConfig::desk()
            };
            if let Some(k) = a.oracle_reps {
                cfg.oracle_reps = k;
            }
            let rows = omega_study(scenario, &a.n_grid, a.reps, &cfg, a.seed)?;
            if let Some(path) = &a.csv {
                write_omega_csv(&rows, fs::File::create(path)?)?;
            }
            emit(&a.out, || to_json(&rows), || report::omega_table(&rows))
        }
        Command::Report(a) => {
            let json = fs::read_to_string(&a.file).map_err(|e| Failure {
                code: 2,
                message: format!("{}: {e}", a.file.display()),
            })?;
            let doc: ReportDoc = serde_json::from_str(&json).map_err(|e| Failure {
                code: 2,
                message: format!("{}: unrecognised report JSON: {e}", a.file.display()),
            })?;
            let text = report::render(&doc);
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
