//! Seeded Monte-Carlo experiment drivers: error-vs-iteration traces and
//! final-MSE-vs-SNR sweeps for the four iterative solvers next to the
//! LS/MAP closed-form oracles, plus CSV/metadata serialization and the
//! problem-file readers used by the CLI.
//!
//! Determinism contract: every trial owns an independent RNG stream
//! derived from (master_seed, trial index), and trial contributions are
//! reduced in strict trial order in fixed-size batches. Reruns of the
//! same config are byte-identical regardless of worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::batch;
use crate::error::{Error, Result};
use crate::kaczmarz::{run_ka_kaczmarz, run_kaczmarz, TraceMode};
use crate::lms::{run_ka_lms, run_lms, APolicy, MuPolicy};
use crate::model::{
    self, convolution_matrix, trial_rng, GaussianPrior, LinearModel, NoiseModel, Observation,
    uniform_weights,
};
use crate::numerics::{DenseMatrix, DenseVector};

/// Seed used when an invocation does not supply one; fixed so bare runs
/// reproduce.
pub const DEFAULT_MASTER_SEED: u64 = 1729;

/// RNG stream index reserved for the shared draw in fixed-system mode.
/// Trial indices are strictly below their u64 count, so no trial can
/// ever reach it.
const FIXED_DRAW_STREAM: u64 = u64::MAX;

/// Trials are dispatched to workers in batches of this many and always
/// folded in ascending trial order.
const TRIAL_CHUNK: u64 = 256;

/// Tag recorded in every table's metadata stating how SNR maps to noise
/// variance.
pub const SNR_DEFINITION: &str = "snr_db = 10*log10(E||H theta||^2 / (m sigma^2)) with \
     E||H theta||^2 = trace(H'H (C + mean mean')) taken over the prior";

/// Which curve family an experiment produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    /// Average squared error per iteration, Kaczmarz solvers, one SNR.
    KaczmarzIterations,
    /// Final average squared error per SNR grid point, Kaczmarz solvers.
    KaczmarzSnrSweep,
    /// Average squared error per sample, LMS filters, one SNR.
    LmsIterations,
    /// Final average squared error per SNR grid point, LMS filters.
    LmsSnrSweep,
}

impl ExperimentKind {
    pub fn is_sweep(&self) -> bool {
        matches!(self, ExperimentKind::KaczmarzSnrSweep | ExperimentKind::LmsSnrSweep)
    }

    pub fn is_lms(&self) -> bool {
        matches!(self, ExperimentKind::LmsIterations | ExperimentKind::LmsSnrSweep)
    }
}

/// One SNR point or an inclusive decibel grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SnrSpec {
    Single { db: f64 },
    Grid { start_db: f64, stop_db: f64, step_db: f64 },
}

impl SnrSpec {
    /// Grid points in ascending order (a single point for Single).
    pub fn points(&self) -> Vec<f64> {
        match *self {
            SnrSpec::Single { db } => vec![db],
            SnrSpec::Grid { start_db, stop_db, step_db } => {
                let n = ((stop_db - start_db) / step_db).round() as usize + 1;
                (0..n).map(|i| start_db + i as f64 * step_db).collect()
            }
        }
    }
}

/// Prior covariance: a scaled identity or an explicit dense matrix
/// (row-major, p rows of p values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CovSpec {
    ScaledIdentity { c: f64 },
    Dense { rows: Vec<Vec<f64>> },
}

/// Prior description as configured; `build` turns it into a validated
/// GaussianPrior for a given dimension. A missing mean is the zero vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub mean: Option<Vec<f64>>,
    pub cov: CovSpec,
}

impl PriorSpec {
    pub fn scaled_identity(c: f64) -> PriorSpec {
        PriorSpec { mean: None, cov: CovSpec::ScaledIdentity { c } }
    }

    pub fn build(&self, p: usize) -> Result<GaussianPrior> {
        let mean = match &self.mean {
            Some(values) => {
                if values.len() != p {
                    return Err(Error::InvalidInput(format!(
                        "prior mean has {} entries, expected {p}",
                        values.len()
                    )));
                }
                Some(DenseVector::new(values.clone())?)
            }
            None => None,
        };
        match &self.cov {
            CovSpec::ScaledIdentity { c } => GaussianPrior::scaled_identity(p, *c, mean),
            CovSpec::Dense { rows } => {
                if rows.len() != p || rows.iter().any(|r| r.len() != p) {
                    return Err(Error::InvalidInput(format!(
                        "prior covariance must be {p}x{p}"
                    )));
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                let cov = DenseMatrix::new(p, p, flat)?;
                GaussianPrior::new(
                    mean.unwrap_or_else(|| DenseVector::zeros(p)),
                    cov,
                )
            }
        }
    }
}

/// Prior share sequence for the LMS filters (Kaczmarz runs always use
/// the uniform per-row share 1/m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SharePolicy {
    Uniform,
    Geometric { r: f64 },
}

impl SharePolicy {
    /// Concrete share sequence for a stream of m samples.
    pub fn resolve(&self, m: usize) -> APolicy {
        match *self {
            SharePolicy::Uniform => APolicy::Uniform { m },
            SharePolicy::Geometric { r } => APolicy::Geometric { r },
        }
    }
}

/// Full description of one Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Measurement rows (Kaczmarz) or input samples (LMS).
    pub m: usize,
    /// Parameter dimension.
    pub p: usize,
    /// Solver iterations; at most m for the LMS kinds (no row reuse).
    pub n_iterations: usize,
    pub trials: u64,
    pub snr: SnrSpec,
    /// Residual-change trigger threshold (Kaczmarz kinds only).
    pub v_th: f64,
    pub prior: PriorSpec,
    pub master_seed: u64,
    pub a_policy: SharePolicy,
    /// Draw one system from a reserved stream and reuse it across all
    /// trials, instead of redrawing per trial (the default).
    #[serde(default)]
    pub fixed_h: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if self.m < 1 || self.p < 1 {
            return fail(format!("dimensions m={}, p={} must be at least 1", self.m, self.p));
        }
        if self.n_iterations < 1 {
            return fail("n_iterations must be at least 1".into());
        }
        if self.trials < 1 {
            return fail("trials must be at least 1".into());
        }
        if self.v_th < 0.0 || !self.v_th.is_finite() {
            return fail(format!("v_th {} must be finite and nonnegative", self.v_th));
        }
        match self.snr {
            SnrSpec::Single { db } => {
                if !db.is_finite() {
                    return fail(format!("snr_db {db} must be finite"));
                }
                if self.kind.is_sweep() {
                    return fail("sweep experiments need an SNR grid, not a single point".into());
                }
            }
            SnrSpec::Grid { start_db, stop_db, step_db } => {
                if !(start_db.is_finite() && stop_db.is_finite() && step_db > 0.0) {
                    return fail("SNR grid needs finite endpoints and a positive step".into());
                }
                if stop_db < start_db {
                    return fail(format!("SNR grid stop {stop_db} below start {start_db}"));
                }
                if !self.kind.is_sweep() {
                    return fail("iteration experiments take a single SNR, not a grid".into());
                }
            }
        }
        if self.kind.is_lms() && self.n_iterations > self.m {
            return fail(format!(
                "LMS runs cannot reuse samples: n_iterations {} exceeds m {}",
                self.n_iterations, self.m
            ));
        }
        if let SharePolicy::Geometric { r } = self.a_policy {
            if !(r > 0.0 && r < 1.0) {
                return fail(format!("geometric share ratio {r} must lie in (0, 1)"));
            }
        }
        self.prior.build(self.p).map(|_| ())
    }
}

/// One result column: estimator name plus its average squared error per
/// axis point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// Everything needed to reproduce a table, written alongside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub config: ExperimentConfig,
    pub snr_definition: String,
    /// Trial-averaged analytic MAP error, one entry per axis point for
    /// sweeps, a single entry otherwise.
    pub analytic_map_mse: Vec<f64>,
}

/// Axis plus equal-length estimator columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub axis_label: String,
    pub axis: Vec<f64>,
    pub columns: Vec<Column>,
    pub metadata: TableMetadata,
}

/// The experiment parameters behind each of the four reference curves:
/// fig2a/fig2b for the Kaczmarz solvers (50x5, 500 iterations, SNR 0 dB
/// or a -10..10 dB sweep), fig4a/fig4b for the LMS filters (50 samples,
/// 5 coefficients, -2 dB or the same sweep). Trials default to 1000.
pub fn paper_preset(name: &str, trials_override: Option<u64>) -> Result<ExperimentConfig> {
    let (kind, n_iterations, snr) = match name {
        "fig2a" => (ExperimentKind::KaczmarzIterations, 500, SnrSpec::Single { db: 0.0 }),
        "fig2b" => (
            ExperimentKind::KaczmarzSnrSweep,
            500,
            SnrSpec::Grid { start_db: -10.0, stop_db: 10.0, step_db: 2.0 },
        ),
        "fig4a" => (ExperimentKind::LmsIterations, 50, SnrSpec::Single { db: -2.0 }),
        "fig4b" => (
            ExperimentKind::LmsSnrSweep,
            50,
            SnrSpec::Grid { start_db: -10.0, stop_db: 10.0, step_db: 2.0 },
        ),
        other => return Err(Error::UnknownPreset { name: other.to_string() }),
    };
    Ok(ExperimentConfig {
        kind,
        m: 50,
        p: 5,
        n_iterations,
        trials: trials_override.unwrap_or(1000),
        snr,
        v_th: 1e-4,
        prior: PriorSpec::scaled_identity(0.1),
        master_seed: DEFAULT_MASTER_SEED,
        a_policy: SharePolicy::Uniform,
        fixed_h: false,
    })
}

/// The per-trial system draw shared across trials in fixed-system mode.
enum FixedDraw {
    Matrix(LinearModel),
    Signal(DenseVector),
}

fn fixed_draw(config: &ExperimentConfig) -> Option<FixedDraw> {
    if !config.fixed_h {
        return None;
    }
    let mut rng = trial_rng(config.master_seed, FIXED_DRAW_STREAM);
    Some(if config.kind.is_lms() {
        FixedDraw::Signal(draw_signal(config.m, &mut rng))
    } else {
        FixedDraw::Matrix(model::generate_random_model_with(config.m, config.p, &mut rng))
    })
}

fn draw_signal(m: usize, rng: &mut rand_chacha::ChaCha8Rng) -> DenseVector {
    use rand::Rng;
    let mut x = DenseVector::zeros(m);
    for i in 0..m {
        x[i] = rng.gen::<f64>();
    }
    x
}

/// Runs all trials of the configured experiment and averages the squared
/// errors. Deterministic for a fixed config, independent of worker count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let prior = config.prior.build(config.p)?;
    let fixed = fixed_draw(config);
    if config.kind.is_sweep() {
        run_sweep(config, &prior, fixed.as_ref())
    } else {
        run_iterations(config, &prior, fixed.as_ref())
    }
}

/// Per-trial payload of an iteration-axis experiment: the two oracle
/// squared errors, the two per-iteration error curves, and the analytic
/// MAP error of the trial's system.
struct IterTrial {
    ls: f64,
    map: f64,
    plain_curve: Vec<f64>,
    aided_curve: Vec<f64>,
    analytic: f64,
}

/// Per-trial payload of a sweep experiment, one entry per grid point.
struct SweepTrial {
    ls: Vec<f64>,
    map: Vec<f64>,
    plain: Vec<f64>,
    aided: Vec<f64>,
    analytic: Vec<f64>,
}

/// Dispatches trials to the worker pool in fixed chunks and folds them
/// in ascending trial order; the first failing trial aborts the run with
/// its index attached.
fn fold_trials<T, F, A>(trials: u64, trial_fn: F, mut accumulate: A) -> Result<()>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
    A: FnMut(T),
{
    let mut start = 0u64;
    while start < trials {
        let end = (start + TRIAL_CHUNK).min(trials);
        let outputs: Vec<(u64, Result<T>)> =
            (start..end).into_par_iter().map(|t| (t, trial_fn(t))).collect();
        for (t, output) in outputs {
            match output {
                Ok(value) => accumulate(value),
                Err(e) => return Err(Error::Trial { trial: t, source: Box::new(e) }),
            }
        }
        start = end;
    }
    Ok(())
}

fn run_iterations(
    config: &ExperimentConfig,
    prior: &GaussianPrior,
    fixed: Option<&FixedDraw>,
) -> Result<ResultTable> {
    let n = config.n_iterations;
    let mut ls_sum = 0.0;
    let mut map_sum = 0.0;
    let mut plain_sum = vec![0.0; n + 1];
    let mut aided_sum = vec![0.0; n + 1];
    let mut analytic_sum = 0.0;

    fold_trials(
        config.trials,
        |t| iteration_trial(config, prior, fixed, t),
        |trial: IterTrial| {
            ls_sum += trial.ls;
            map_sum += trial.map;
            for k in 0..=n {
                plain_sum[k] += trial.plain_curve[k];
                aided_sum[k] += trial.aided_curve[k];
            }
            analytic_sum += trial.analytic;
        },
    )?;

    let count = config.trials as f64;
    let ls_avg = ls_sum / count;
    let map_avg = map_sum / count;
    let plain: Vec<f64> = plain_sum.iter().map(|s| s / count).collect();
    let aided: Vec<f64> = aided_sum.iter().map(|s| s / count).collect();

    let constant = |v: f64| vec![v; n + 1];
    let columns = if config.kind.is_lms() {
        vec![
            Column { name: "lms".into(), values: plain },
            Column { name: "ka_lms".into(), values: aided },
            Column { name: "ls".into(), values: constant(ls_avg) },
            Column { name: "map".into(), values: constant(map_avg) },
        ]
    } else {
        vec![
            Column { name: "ls".into(), values: constant(ls_avg) },
            Column { name: "map".into(), values: constant(map_avg) },
            Column { name: "kaczmarz".into(), values: plain },
            Column { name: "ka_kaczmarz".into(), values: aided },
        ]
    };
    Ok(ResultTable {
        axis_label: "k".into(),
        axis: (0..=n).map(|k| k as f64).collect(),
        columns,
        metadata: TableMetadata {
            config: config.clone(),
            snr_definition: SNR_DEFINITION.into(),
            analytic_map_mse: vec![analytic_sum / count],
        },
    })
}

fn run_sweep(
    config: &ExperimentConfig,
    prior: &GaussianPrior,
    fixed: Option<&FixedDraw>,
) -> Result<ResultTable> {
    let points = config.snr.points();
    let len = points.len();
    let mut ls_sum = vec![0.0; len];
    let mut map_sum = vec![0.0; len];
    let mut plain_sum = vec![0.0; len];
    let mut aided_sum = vec![0.0; len];
    let mut analytic_sum = vec![0.0; len];

    fold_trials(
        config.trials,
        |t| sweep_trial(config, prior, fixed, &points, t),
        |trial: SweepTrial| {
            for i in 0..len {
                ls_sum[i] += trial.ls[i];
                map_sum[i] += trial.map[i];
                plain_sum[i] += trial.plain[i];
                aided_sum[i] += trial.aided[i];
                analytic_sum[i] += trial.analytic[i];
            }
        },
    )?;

    let count = config.trials as f64;
    let avg = |sums: Vec<f64>| -> Vec<f64> { sums.iter().map(|s| s / count).collect() };
    let (plain_name, aided_name) = if config.kind.is_lms() {
        ("lms", "ka_lms")
    } else {
        ("kaczmarz", "ka_kaczmarz")
    };
    let columns = if config.kind.is_lms() {
        vec![
            Column { name: plain_name.into(), values: avg(plain_sum) },
            Column { name: aided_name.into(), values: avg(aided_sum) },
            Column { name: "ls".into(), values: avg(ls_sum) },
            Column { name: "map".into(), values: avg(map_sum) },
        ]
    } else {
        vec![
            Column { name: "ls".into(), values: avg(ls_sum) },
            Column { name: "map".into(), values: avg(map_sum) },
            Column { name: plain_name.into(), values: avg(plain_sum) },
            Column { name: aided_name.into(), values: avg(aided_sum) },
        ]
    };
    Ok(ResultTable {
        axis_label: "snr_db".into(),
        axis: points,
        columns,
        metadata: TableMetadata {
            config: config.clone(),
            snr_definition: SNR_DEFINITION.into(),
            analytic_map_mse: avg(analytic_sum),
        },
    })
}

/// Draws one system + parameter + observation at the given SNR from the
/// trial's RNG and returns everything the estimators need.
fn draw_problem(
    config: &ExperimentConfig,
    prior: &GaussianPrior,
    fixed: Option<&FixedDraw>,
    snr_db: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<(LinearModel, Observation, NoiseModel, DenseVector)> {
    let model = match fixed {
        Some(FixedDraw::Matrix(m)) => m.clone(),
        Some(FixedDraw::Signal(x)) => LinearModel::new(convolution_matrix(x, config.p))?,
        None if config.kind.is_lms() => {
            let x = draw_signal(config.m, rng);
            LinearModel::new(convolution_matrix(&x, config.p))?
        }
        None => model::generate_random_model_with(config.m, config.p, rng),
    };
    let theta = model::sample_parameter_with(prior, rng);
    let noise = model::calibrate_noise(&model, prior, snr_db);
    let obs = model::observe_with(&model, &theta, &noise, rng);
    Ok((model, obs, noise, theta))
}

fn single_snr(config: &ExperimentConfig) -> f64 {
    match config.snr {
        SnrSpec::Single { db } => db,
        SnrSpec::Grid { .. } => unreachable!("validated: iteration kinds carry a single SNR"),
    }
}

fn iteration_trial(
    config: &ExperimentConfig,
    prior: &GaussianPrior,
    fixed: Option<&FixedDraw>,
    t: u64,
) -> Result<IterTrial> {
    let mut rng = trial_rng(config.master_seed, t);
    let (model, obs, noise, theta) = draw_problem(config, prior, fixed, single_snr(config), &mut rng)?;
    let ls = batch::ls_estimate(&model, &obs, &noise)?;
    let map = batch::map_estimate(&model, &obs, &noise, prior)?;
    let analytic = batch::map_bayes_mse(&model, &noise, prior)?;

    let (plain_curve, aided_curve) = if config.kind.is_lms() {
        let stream: Vec<(DenseVector, f64)> =
            (0..config.m).map(|i| (model.row_vector(i), obs.y[i])).collect();
        let plain = run_lms(
            stream.clone(),
            &noise,
            config.n_iterations,
            None,
            Some(&theta),
            TraceMode::Errors,
        )?;
        let aided = run_ka_lms(
            stream,
            &noise,
            prior,
            config.a_policy.resolve(config.m),
            MuPolicy::TaperedBound,
            config.n_iterations,
            None,
            Some(&theta),
            TraceMode::Errors,
        )?;
        (curve(plain), curve(aided))
    } else {
        let plain = run_kaczmarz(
            &model,
            &obs,
            &noise,
            config.n_iterations,
            config.v_th,
            None,
            TraceMode::Errors,
        )?;
        let aided = run_ka_kaczmarz(
            &model,
            &obs,
            &noise,
            prior,
            &uniform_weights(config.m),
            config.n_iterations,
            config.v_th,
            None,
            TraceMode::Errors,
        )?;
        (curve(plain), curve(aided))
    };
    Ok(IterTrial {
        ls: ls.sub(&theta).squared_norm(),
        map: map.sub(&theta).squared_norm(),
        plain_curve,
        aided_curve,
        analytic,
    })
}

fn curve(report: crate::kaczmarz::SolveReport) -> Vec<f64> {
    report.trace.expect("observation carries theta_true").squared_errors
}

fn sweep_trial(
    config: &ExperimentConfig,
    prior: &GaussianPrior,
    fixed: Option<&FixedDraw>,
    points: &[f64],
    t: u64,
) -> Result<SweepTrial> {
    let mut rng = trial_rng(config.master_seed, t);
    let len = points.len();
    let mut out = SweepTrial {
        ls: Vec::with_capacity(len),
        map: Vec::with_capacity(len),
        plain: Vec::with_capacity(len),
        aided: Vec::with_capacity(len),
        analytic: Vec::with_capacity(len),
    };
    for &snr_db in points {
        let (model, obs, noise, theta) = draw_problem(config, prior, fixed, snr_db, &mut rng)?;
        let ls = batch::ls_estimate(&model, &obs, &noise)?;
        let map = batch::map_estimate(&model, &obs, &noise, prior)?;
        out.ls.push(ls.sub(&theta).squared_norm());
        out.map.push(map.sub(&theta).squared_norm());
        out.analytic.push(batch::map_bayes_mse(&model, &noise, prior)?);

        let (plain, aided) = if config.kind.is_lms() {
            let stream: Vec<(DenseVector, f64)> =
                (0..config.m).map(|i| (model.row_vector(i), obs.y[i])).collect();
            let plain = run_lms(
                stream.clone(),
                &noise,
                config.n_iterations,
                None,
                None,
                TraceMode::Off,
            )?;
            let aided = run_ka_lms(
                stream,
                &noise,
                prior,
                config.a_policy.resolve(config.m),
                MuPolicy::TaperedBound,
                config.n_iterations,
                None,
                None,
                TraceMode::Off,
            )?;
            (plain, aided)
        } else {
            let plain = run_kaczmarz(
                &model,
                &obs,
                &noise,
                config.n_iterations,
                config.v_th,
                None,
                TraceMode::Off,
            )?;
            let aided = run_ka_kaczmarz(
                &model,
                &obs,
                &noise,
                prior,
                &uniform_weights(config.m),
                config.n_iterations,
                config.v_th,
                None,
                TraceMode::Off,
            )?;
            (plain, aided)
        };
        out.plain.push(plain.estimate.sub(&theta).squared_norm());
        out.aided.push(aided.estimate.sub(&theta).squared_norm());
    }
    Ok(out)
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    path.with_extension("meta.json")
}

/// Writes the table as CSV (header row, then one row per axis point,
/// values with 17 significant digits) plus a JSON metadata sidecar at
/// the same stem. Output is byte-stable for identical tables.
pub fn write_table(table: &ResultTable, path: &Path) -> Result<()> {
    let mut text = String::new();
    text.push_str(&table.axis_label);
    for column in &table.columns {
        text.push(',');
        text.push_str(&column.name);
    }
    text.push('\n');
    for (i, x) in table.axis.iter().enumerate() {
        let _ = write!(text, "{x}");
        for column in &table.columns {
            let _ = write!(text, ",{:.16e}", column.values[i]);
        }
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::Io {
        action: "write",
        path: path.to_path_buf(),
        source: e,
    })?;

    let sidecar = sidecar_path(path);
    let json = serde_json::to_string_pretty(&table.metadata)
        .expect("metadata serialization cannot fail");
    fs::write(&sidecar, json + "\n").map_err(|e| Error::Io {
        action: "write",
        path: sidecar,
        source: e,
    })
}

/// Reads back a table written by write_table, including its sidecar.
pub fn read_table(path: &Path) -> Result<ResultTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        action: "read",
        path: path.to_path_buf(),
        source: e,
    })?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty table file".into()))?;
    let mut fields = header.split(',');
    let axis_label = fields.next().unwrap_or("").to_string();
    let names: Vec<String> = fields.map(str::to_string).collect();
    if axis_label.is_empty() || names.is_empty() {
        return Err(parse_err(1, format!("malformed header {header:?}")));
    }

    let mut axis = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<&str> = line.split(',').collect();
        if row.len() != names.len() + 1 {
            return Err(parse_err(
                idx + 1,
                format!("expected {} fields, found {}", names.len() + 1, row.len()),
            ));
        }
        for (j, field) in row.iter().enumerate() {
            let value: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(idx + 1, format!("not a number: {field:?}")))?;
            if j == 0 {
                axis.push(value);
            } else {
                values[j - 1].push(value);
            }
        }
    }
    if axis.is_empty() {
        return Err(parse_err(2, "table has no data rows".into()));
    }

    let sidecar = sidecar_path(path);
    let meta_text = fs::read_to_string(&sidecar).map_err(|e| Error::Io {
        action: "read",
        path: sidecar.clone(),
        source: e,
    })?;
    let metadata: TableMetadata = serde_json::from_str(&meta_text).map_err(|e| Error::Parse {
        path: sidecar,
        line: e.line(),
        message: e.to_string(),
    })?;

    Ok(ResultTable {
        axis_label,
        axis,
        columns: names
            .into_iter()
            .zip(values)
            .map(|(name, values)| Column { name, values })
            .collect(),
        metadata,
    })
}

/// Reads a Kaczmarz problem file: one comma-separated row of H per line,
/// then a final line holding y (one value per row of H). Blank lines and
/// lines starting with '#' are skipped.
pub fn read_kaczmarz_problem(path: &Path) -> Result<(LinearModel, DenseVector)> {
    let rows = read_numeric_rows(path)?;
    if rows.len() < 2 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "need at least one H row plus the y line".into(),
        });
    }
    let (y_line, h_lines) = rows.split_last().expect("len >= 2");
    let m = h_lines.len();
    let p = h_lines[0].1.len();
    let mut data = Vec::with_capacity(m * p);
    for (line_no, row) in h_lines {
        if row.len() != p {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: *line_no,
                message: format!("H row has {} values, expected {p}", row.len()),
            });
        }
        data.extend_from_slice(row);
    }
    if y_line.1.len() != m {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: y_line.0,
            message: format!("y has {} values but H has {m} rows", y_line.1.len()),
        });
    }
    let model = LinearModel::new(DenseMatrix::new(m, p, data)?)?;
    Ok((model, DenseVector::new(y_line.1.clone())?))
}

/// Reads an LMS stream file of `x,y` sample pairs, one per line.
pub fn read_lms_stream(path: &Path) -> Result<(DenseVector, DenseVector)> {
    let rows = read_numeric_rows(path)?;
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for (line_no, row) in &rows {
        if row.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: *line_no,
                message: format!("expected an x,y pair, found {} values", row.len()),
            });
        }
        x.push(row[0]);
        y.push(row[1]);
    }
    if x.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "stream file has no samples".into(),
        });
    }
    Ok((DenseVector::new(x)?, DenseVector::new(y)?))
}

/// Shared reader: numeric CSV lines with their 1-based line numbers.
fn read_numeric_rows(path: &Path) -> Result<Vec<(usize, Vec<f64>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        action: "read",
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for field in trimmed.split(',') {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("not a number: {field:?}"),
            })?;
            row.push(value);
        }
        rows.push((idx + 1, row));
    }
    Ok(rows)
}
