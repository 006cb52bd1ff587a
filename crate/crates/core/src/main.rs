//! Thin command-line front end: bundled reference experiments, fully
//! specified Monte-Carlo runs, and one-shot solves of problem files.
//! All substance lives in the library; this file parses flags, picks a
//! worker count, and maps errors to exit codes (0 ok, 1 usage, 2
//! numerical failure).

use std::path::PathBuf;
use std::process::exit;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ka_solve::error::{Error, Result};
use ka_solve::harness::{
    self, CovSpec, ExperimentConfig, ExperimentKind, PriorSpec, SharePolicy, SnrSpec,
    TableMetadata, DEFAULT_MASTER_SEED,
};
use ka_solve::kaczmarz::{run_ka_kaczmarz, run_kaczmarz, TraceMode};
use ka_solve::lms::{run_ka_lms, run_lms, MuPolicy};
use ka_solve::model::{convolution_rows, uniform_weights, GaussianPrior, NoiseModel, Observation};
use ka_solve::numerics::DenseVector;

#[derive(Parser)]
#[command(
    name = "ka-solve",
    version,
    about = "Knowledge-aided Kaczmarz and LMS estimation with Gaussian priors"
)]
struct Cli {
    /// Worker threads for Monte-Carlo trials; falls back to the
    /// KA_SOLVE_WORKERS environment variable, then to all cores.
    /// Results do not depend on this value.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a bundled reference experiment and write its result table.
    Preset(PresetArgs),
    /// Run a fully specified Monte-Carlo experiment.
    Experiment(ExperimentArgs),
    /// Solve one linear system from a problem file and print the estimate.
    SolveKaczmarz(SolveKaczmarzArgs),
    /// Identify a filter from an x,y sample stream and print the estimate.
    SolveLms(SolveLmsArgs),
}

#[derive(Args)]
struct PresetArgs {
    /// Preset name: fig2a, fig2b, fig4a or fig4b.
    #[arg(long)]
    name: String,
    /// Monte-Carlo trials [default: 1000; reference curves use 100000].
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed for the per-trial RNG streams.
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    seed: u64,
    /// Reuse one system draw across all trials instead of redrawing.
    #[arg(long)]
    fixed_h: bool,
    /// Output CSV path; a .meta.json sidecar lands at the same stem.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Family {
    Kaczmarz,
    Lms,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Estimator family to run.
    #[arg(long, value_enum, default_value_t = Family::Kaczmarz)]
    family: Family,
    /// Measurement rows (kaczmarz) or input samples (lms).
    #[arg(long, default_value_t = 50)]
    m: usize,
    /// Parameter dimension.
    #[arg(long, default_value_t = 5)]
    p: usize,
    /// Solver iterations [default: 500 for kaczmarz, m for lms].
    #[arg(long = "n-iters")]
    n_iters: Option<usize>,
    /// Monte-Carlo trials.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Single SNR point in dB; produces an error-vs-iteration table.
    #[arg(long, conflicts_with = "snr_range", allow_hyphen_values = true)]
    snr: Option<f64>,
    /// SNR grid in dB; produces a final-error-vs-SNR table.
    #[arg(long, value_name = "START:STOP:STEP", allow_hyphen_values = true)]
    snr_range: Option<String>,
    /// Residual-change trigger threshold (kaczmarz family).
    #[arg(long, default_value_t = 1e-4)]
    vth: f64,
    /// Prior covariance scale c in C = c I.
    #[arg(long, default_value_t = 0.1)]
    cov_scale: f64,
    /// Prior mean as comma-separated values [default: zero].
    #[arg(long, allow_hyphen_values = true)]
    mean: Option<String>,
    /// Prior share sequence for lms: uniform or geometric[:r].
    #[arg(long, default_value = "uniform")]
    a_policy: String,
    /// Master seed for the per-trial RNG streams.
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    seed: u64,
    /// Reuse one system draw across all trials instead of redrawing.
    #[arg(long)]
    fixed_h: bool,
    /// Rerun the exact experiment recorded in a .meta.json sidecar.
    #[arg(long, value_name = "META_JSON", conflicts_with_all = [
        "family", "m", "p", "n_iters", "trials", "snr", "snr_range",
        "vth", "cov_scale", "mean", "a_policy", "seed", "fixed_h",
    ])]
    replay: Option<PathBuf>,
    /// Output CSV path; a .meta.json sidecar lands at the same stem.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveKaczmarzArgs {
    /// Problem file: comma-separated H rows, then a final y line.
    /// Blank lines and lines starting with '#' are skipped.
    file: PathBuf,
    /// Iterations [default: 10 passes over the rows].
    #[arg(long = "n-iters")]
    n_iters: Option<usize>,
    /// Residual-change trigger threshold.
    #[arg(long, default_value_t = 1e-4)]
    vth: f64,
    /// Homoscedastic noise variance behind the row weights.
    #[arg(long, default_value_t = 1.0)]
    noise_var: f64,
    /// Prior covariance scale c in C = c I; omit to run without a prior.
    #[arg(long)]
    cov_scale: Option<f64>,
    /// Prior mean as comma-separated values [default: zero].
    #[arg(long, requires = "cov_scale", allow_hyphen_values = true)]
    mean: Option<String>,
}

#[derive(Args)]
struct SolveLmsArgs {
    /// Stream file: one "x,y" sample pair per line.
    file: PathBuf,
    /// Filter length to identify.
    #[arg(long)]
    p: usize,
    /// Samples to consume [default: the whole stream].
    #[arg(long = "n-iters")]
    n_iters: Option<usize>,
    /// Homoscedastic noise variance behind the sample weights.
    #[arg(long, default_value_t = 1.0)]
    noise_var: f64,
    /// Prior covariance scale c in C = c I; omit to run without a prior.
    #[arg(long)]
    cov_scale: Option<f64>,
    /// Prior mean as comma-separated values [default: zero].
    #[arg(long, requires = "cov_scale", allow_hyphen_values = true)]
    mean: Option<String>,
    /// Prior share sequence: uniform or geometric[:r].
    #[arg(long, default_value = "uniform")]
    a_policy: String,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        exit(if e.is_numerical() { 2 } else { 1 });
    }
}

fn run(cli: Cli) -> Result<()> {
    configure_workers(cli.workers)?;
    match cli.command {
        Command::Preset(args) => run_preset(args),
        Command::Experiment(args) => run_experiment_cmd(args),
        Command::SolveKaczmarz(args) => run_solve_kaczmarz(args),
        Command::SolveLms(args) => run_solve_lms(args),
    }
}

/// Builds the global worker pool: explicit flag first, then the
/// KA_SOLVE_WORKERS variable, otherwise rayon's default (all cores).
fn configure_workers(flag: Option<usize>) -> Result<()> {
    let workers = match flag {
        Some(n) => Some(n),
        None => match std::env::var("KA_SOLVE_WORKERS") {
            Ok(text) => Some(text.trim().parse::<usize>().map_err(|_| {
                Error::InvalidInput(format!("KA_SOLVE_WORKERS is not a thread count: {text:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::InvalidInput("worker count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("worker pool setup failed: {e}")))?;
    }
    Ok(())
}

fn run_preset(args: PresetArgs) -> Result<()> {
    let mut config = harness::paper_preset(&args.name, args.trials)?;
    config.master_seed = args.seed;
    config.fixed_h = args.fixed_h;
    let table = harness::run_experiment(&config)?;
    harness::write_table(&table, &args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run_experiment_cmd(args: ExperimentArgs) -> Result<()> {
    let config = match &args.replay {
        Some(path) => replay_config(path)?,
        None => experiment_config(&args)?,
    };
    let table = harness::run_experiment(&config)?;
    harness::write_table(&table, &args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

/// Pulls the config back out of a run's .meta.json sidecar.
fn replay_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        action: "read",
        path: path.clone(),
        source: e,
    })?;
    let metadata: TableMetadata = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    Ok(metadata.config)
}

fn experiment_config(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let snr = match (args.snr, &args.snr_range) {
        (Some(db), None) => SnrSpec::Single { db },
        (None, Some(text)) => parse_snr_range(text)?,
        (None, None) => {
            return Err(Error::InvalidInput(
                "pass either --snr or --snr-range".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    let sweep = matches!(snr, SnrSpec::Grid { .. });
    let kind = match (args.family, sweep) {
        (Family::Kaczmarz, false) => ExperimentKind::KaczmarzIterations,
        (Family::Kaczmarz, true) => ExperimentKind::KaczmarzSnrSweep,
        (Family::Lms, false) => ExperimentKind::LmsIterations,
        (Family::Lms, true) => ExperimentKind::LmsSnrSweep,
    };
    let n_iterations = args.n_iters.unwrap_or(match args.family {
        Family::Kaczmarz => 500,
        Family::Lms => args.m,
    });
    Ok(ExperimentConfig {
        kind,
        m: args.m,
        p: args.p,
        n_iterations,
        trials: args.trials,
        snr,
        v_th: args.vth,
        prior: PriorSpec {
            mean: args.mean.as_deref().map(parse_values).transpose()?,
            cov: CovSpec::ScaledIdentity { c: args.cov_scale },
        },
        master_seed: args.seed,
        a_policy: parse_share_policy(&args.a_policy)?,
        fixed_h: args.fixed_h,
    })
}

fn run_solve_kaczmarz(args: SolveKaczmarzArgs) -> Result<()> {
    let (model, y) = harness::read_kaczmarz_problem(&args.file)?;
    let m = model.m();
    let noise = NoiseModel::homoscedastic(m, args.noise_var)?;
    let obs = Observation::new(y, None);
    let n_iters = args.n_iters.unwrap_or(10 * m);
    let report = match prior_from_flags(args.cov_scale, args.mean.as_deref(), model.p())? {
        Some(prior) => run_ka_kaczmarz(
            &model,
            &obs,
            &noise,
            &prior,
            &uniform_weights(m),
            n_iters,
            args.vth,
            None,
            TraceMode::Off,
        )?,
        None => {
            for i in 0..m {
                if model.row(i).iter().all(|x| *x == 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "H row {} is all zeros; the plain solver cannot use it",
                        i + 1
                    )));
                }
            }
            run_kaczmarz(&model, &obs, &noise, n_iters, args.vth, None, TraceMode::Off)?
        }
    };
    println!("{}", format_estimate(&report.estimate));
    Ok(())
}

fn run_solve_lms(args: SolveLmsArgs) -> Result<()> {
    let (x, y) = harness::read_lms_stream(&args.file)?;
    let m = x.len();
    if args.p < 1 || args.p > m {
        return Err(Error::InvalidInput(format!(
            "filter length {} must lie in 1..={m}",
            args.p
        )));
    }
    let n_iters = args.n_iters.unwrap_or(m);
    if n_iters < 1 || n_iters > m {
        return Err(Error::InvalidInput(format!(
            "n-iters {n_iters} must lie in 1..={m}: the stream has {m} samples"
        )));
    }
    let noise = NoiseModel::homoscedastic(m, args.noise_var)?;
    let stream = convolution_rows(&x, args.p)
        .into_iter()
        .zip(y.as_slice().iter().copied());
    let report = match prior_from_flags(args.cov_scale, args.mean.as_deref(), args.p)? {
        Some(prior) => run_ka_lms(
            stream,
            &noise,
            &prior,
            parse_share_policy(&args.a_policy)?.resolve(m),
            MuPolicy::TaperedBound,
            n_iters,
            None,
            None,
            TraceMode::Off,
        )?,
        None => run_lms(stream, &noise, n_iters, None, None, TraceMode::Off)?,
    };
    println!("{}", format_estimate(&report.estimate));
    Ok(())
}

/// Prior from the solve-command flags; None means run without one.
fn prior_from_flags(
    cov_scale: Option<f64>,
    mean: Option<&str>,
    p: usize,
) -> Result<Option<GaussianPrior>> {
    let Some(c) = cov_scale else {
        return Ok(None);
    };
    let mean = match mean {
        Some(text) => {
            let values = parse_values(text)?;
            if values.len() != p {
                return Err(Error::InvalidInput(format!(
                    "prior mean has {} entries, expected {p}",
                    values.len()
                )));
            }
            Some(DenseVector::new(values)?)
        }
        None => None,
    };
    GaussianPrior::scaled_identity(p, c, mean).map(Some)
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|field| {
            field.trim().parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!("not a number in value list: {field:?}"))
            })
        })
        .collect()
}

fn parse_snr_range(text: &str) -> Result<SnrSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(format!(
            "--snr-range wants START:STOP:STEP, got {text:?}"
        )));
    }
    let mut values = [0.0; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| {
            Error::InvalidInput(format!("not a number in --snr-range: {part:?}"))
        })?;
    }
    Ok(SnrSpec::Grid {
        start_db: values[0],
        stop_db: values[1],
        step_db: values[2],
    })
}

fn parse_share_policy(text: &str) -> Result<SharePolicy> {
    match text {
        "uniform" => Ok(SharePolicy::Uniform),
        "geometric" => Ok(SharePolicy::Geometric { r: 0.999 }),
        other => match other.strip_prefix("geometric:") {
            Some(ratio) => {
                let r: f64 = ratio.trim().parse().map_err(|_| {
                    Error::InvalidInput(format!("geometric ratio is not a number: {ratio:?}"))
                })?;
                Ok(SharePolicy::Geometric { r })
            }
            None => Err(Error::InvalidInput(format!(
                "unknown share policy {text:?}; use uniform or geometric[:r]"
            ))),
        },
    }
}

fn format_estimate(estimate: &DenseVector) -> String {
    estimate
        .as_slice()
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}
