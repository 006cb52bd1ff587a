//! Row-action solvers: classical Kaczmarz and its knowledge-aided variant
//! that adds a prior pull toward the Gaussian mean on every update. Both
//! share one step-width schedule: per-row upper bounds first, then, once
//! the instantaneous residual stops changing across a full row cycle, a
//! linear ramp of the step width down toward zero at the final iteration.

use crate::error::{Error, Result};
use crate::model::{GaussianPrior, LinearModel, NoiseModel, Observation, WeightScheme};
use crate::numerics::{DenseMatrix, DenseVector};

/// 1-based cyclic row selector: ((k - 1) mod m) + 1.
pub fn cyclic_index(k: usize, m: usize) -> usize {
    assert!(k >= 1 && m >= 1, "cyclic_index: k and m must be >= 1");
    ((k - 1) % m) + 1
}

/// Largest step width keeping the error-propagation spectrum inside
/// [0, 1): 1 / (w ||h||^2 + a lambda1) with lambda1 the largest
/// eigenvalue of the prior precision. With a = 0 (no prior) the row must
/// be nonzero so the denominator stays positive.
pub fn max_step_width(h: &DenseVector, w: f64, a: f64, lambda1: f64) -> f64 {
    assert!(w > 0.0 && a >= 0.0 && lambda1 >= 0.0, "max_step_width: bad scalars");
    let denom = w * h.squared_norm() + a * lambda1;
    assert!(denom > 0.0, "max_step_width: zero denominator");
    1.0 / denom
}

/// y_i - h' theta, accumulated in index order (bit-compatible with
/// DenseMatrix::matvec so noiseless fixed points hold exactly).
pub(crate) fn row_residual(h: &[f64], theta: &DenseVector, y_i: f64) -> f64 {
    debug_assert_eq!(h.len(), theta.len());
    let mut acc = 0.0;
    for (hj, tj) in h.iter().zip(theta.iter()) {
        acc += hj * tj;
    }
    y_i - acc
}

/// theta += mu (h w v - a C^-1 (theta - mean)); the prior term is absent
/// when `prior_terms` is None. This is the one arithmetic kernel shared
/// by every row-action solver in the crate, so cross-solver iterate
/// comparisons are bit-exact by construction.
pub(crate) fn apply_update(
    theta: &mut DenseVector,
    h: &[f64],
    w: f64,
    v: f64,
    prior_terms: Option<(f64, &GaussianPrior)>,
    mu: f64,
) {
    match prior_terms {
        Some((a, prior)) => {
            let pull = prior.precision_pull(theta);
            for j in 0..theta.len() {
                theta[j] += mu * (h[j] * w * v - a * pull[j]);
            }
        }
        None => {
            for j in 0..theta.len() {
                theta[j] += mu * (h[j] * w * v);
            }
        }
    }
}

/// One knowledge-aided update from row (h, y_i) with weight w, prior
/// share a, and step width mu.
pub fn ka_kaczmarz_step(
    theta: &DenseVector,
    h: &DenseVector,
    y_i: f64,
    w: f64,
    a: f64,
    prior: &GaussianPrior,
    mu: f64,
) -> DenseVector {
    assert!(mu >= 0.0, "ka_kaczmarz_step: mu must be >= 0");
    assert_eq!(theta.len(), h.len(), "ka_kaczmarz_step: dimension mismatch");
    assert_eq!(theta.len(), prior.p(), "ka_kaczmarz_step: prior dimension mismatch");
    let mut out = theta.clone();
    let v = row_residual(h.as_slice(), &out, y_i);
    apply_update(&mut out, h.as_slice(), w, v, Some((a, prior)), mu);
    out
}

/// Classical Kaczmarz update: the same step with the prior term removed.
pub fn kaczmarz_step(theta: &DenseVector, h: &DenseVector, y_i: f64, w: f64, mu: f64) -> DenseVector {
    assert!(mu >= 0.0, "kaczmarz_step: mu must be >= 0");
    assert_eq!(theta.len(), h.len(), "kaczmarz_step: dimension mismatch");
    let mut out = theta.clone();
    let v = row_residual(h.as_slice(), &out, y_i);
    apply_update(&mut out, h.as_slice(), w, v, None, mu);
    out
}

/// I - mu (h w h' + a C^-1), the matrix governing how the estimation
/// error of one update propagates to the next. Diagnostics only.
pub fn error_propagation_matrix(
    h: &DenseVector,
    w: f64,
    a: f64,
    prior: &GaussianPrior,
    mu: f64,
) -> DenseMatrix {
    assert!(mu >= 0.0, "error_propagation_matrix: mu must be >= 0");
    let p = h.len();
    assert_eq!(p, prior.p(), "error_propagation_matrix: dimension mismatch");
    let mut m = DenseMatrix::identity(p);
    for i in 0..p {
        for j in 0..p {
            m[(i, j)] -= mu * (h[i] * w * h[j] + a * prior.cov_inv()[(i, j)]);
        }
    }
    m
}

/// Schedule phase: per-row upper bounds, or the linear ramp after the
/// residual-change trigger has fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPhase {
    BoundPhase,
    DecayPhase,
}

/// Step-width schedule state. In BoundPhase each iteration uses its
/// row's precomputed bound. At the start of every cycle the controller
/// compares the instantaneous residual against the one from the cycle
/// before; a change smaller than the threshold switches to DecayPhase,
/// where the width restarts from the global (smallest) bound and drops
/// by a fixed decrement each iteration, reaching that decrement at the
/// final iteration (the ramp's zero lies one step past the horizon).
#[derive(Debug, Clone)]
pub struct StepController {
    phase: StepPhase,
    row_bounds: Vec<f64>,
    global_bound: f64,
    mu_current: f64,
    mu_r: f64,
    v_prev_cycle: f64,
    v_threshold: f64,
    n_total: usize,
    decay_started_at: Option<usize>,
}

impl StepController {
    /// `row_bounds[i]` is the BoundPhase width for row i; the decay
    /// restart value is the smallest of them.
    pub fn new(row_bounds: Vec<f64>, v_threshold: f64, n_total: usize) -> Self {
        assert!(!row_bounds.is_empty(), "StepController: no rows");
        assert!(
            row_bounds.iter().all(|b| b.is_finite() && *b > 0.0),
            "StepController: bounds must be positive and finite"
        );
        assert!(v_threshold >= 0.0, "StepController: negative threshold");
        assert!(n_total >= 1, "StepController: empty horizon");
        let global_bound = row_bounds.iter().copied().fold(f64::INFINITY, f64::min);
        StepController {
            phase: StepPhase::BoundPhase,
            row_bounds,
            global_bound,
            mu_current: 0.0,
            mu_r: 0.0,
            // sentinel: no comparison can fire during the first cycle
            v_prev_cycle: f64::MAX,
            v_threshold,
            n_total,
            decay_started_at: None,
        }
    }

    pub fn phase(&self) -> StepPhase {
        self.phase
    }

    /// Iteration (1-based) at which the trigger fired, if it has.
    pub fn decay_started_at(&self) -> Option<usize> {
        self.decay_started_at
    }

    /// Step width for iteration k (1-based) on 0-based row index `row`,
    /// given the residual v_k computed before the update. The trigger is
    /// evaluated only when `row` starts a cycle.
    pub fn mu_for(&mut self, k: usize, row: usize, v_k: f64) -> f64 {
        debug_assert!(k >= 1 && k <= self.n_total);
        match self.phase {
            StepPhase::DecayPhase => {
                self.mu_current -= self.mu_r;
            }
            StepPhase::BoundPhase => {
                self.mu_current = self.row_bounds[row];
                if row == 0 {
                    if (v_k - self.v_prev_cycle).abs() < self.v_threshold {
                        self.phase = StepPhase::DecayPhase;
                        self.decay_started_at = Some(k);
                        self.mu_current = self.global_bound;
                        self.mu_r = self.mu_current / (self.n_total - k + 1) as f64;
                    }
                    self.v_prev_cycle = v_k;
                }
            }
        }
        debug_assert!(self.mu_current >= 0.0, "step width went negative");
        self.mu_current
    }
}

/// How much per-iteration state a solver run records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    /// Estimate only.
    Off,
    /// Squared error per iteration (needs the true parameter).
    Errors,
    /// Squared errors plus error vectors and the step widths used.
    Instrumented,
}

/// Per-iteration error history. Entry 0 describes the start vector, so
/// the error sequences have one more entry than iterations run; the step
/// widths have exactly one entry per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTrace {
    pub squared_errors: Vec<f64>,
    pub error_vectors: Option<Vec<DenseVector>>,
    pub mu_values: Option<Vec<f64>>,
}

/// Outcome of a solver run. `trace` is present when tracing was
/// requested and the observation carried the true parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub estimate: DenseVector,
    pub trace: Option<ErrorTrace>,
    pub iterations_run: usize,
    pub decay_started_at: Option<usize>,
}

/// Knowledge-aided Kaczmarz: N cyclic row updates with the prior pull,
/// scheduled step widths, and the residual-change trigger. The start
/// vector defaults to zero.
#[allow(clippy::too_many_arguments)]
pub fn run_ka_kaczmarz(
    model: &LinearModel,
    observation: &Observation,
    noise: &NoiseModel,
    prior: &GaussianPrior,
    weights: &WeightScheme,
    n_iterations: usize,
    v_th: f64,
    theta0: Option<&DenseVector>,
    mode: TraceMode,
) -> Result<SolveReport> {
    assert_eq!(weights.m(), model.m(), "run_ka_kaczmarz: weights/rows mismatch");
    assert_eq!(prior.p(), model.p(), "run_ka_kaczmarz: prior dimension mismatch");
    run_row_action(
        model,
        observation,
        noise,
        Some((weights, prior)),
        n_iterations,
        v_th,
        theta0,
        mode,
    )
}

/// Classical Kaczmarz with the same step-width schedule, prior terms
/// removed everywhere (bounds become 1 / (w ||h||^2)).
pub fn run_kaczmarz(
    model: &LinearModel,
    observation: &Observation,
    noise: &NoiseModel,
    n_iterations: usize,
    v_th: f64,
    theta0: Option<&DenseVector>,
    mode: TraceMode,
) -> Result<SolveReport> {
    run_row_action(model, observation, noise, None, n_iterations, v_th, theta0, mode)
}

#[allow(clippy::too_many_arguments)]
fn run_row_action(
    model: &LinearModel,
    observation: &Observation,
    noise: &NoiseModel,
    ka: Option<(&WeightScheme, &GaussianPrior)>,
    n_iterations: usize,
    v_th: f64,
    theta0: Option<&DenseVector>,
    mode: TraceMode,
) -> Result<SolveReport> {
    let (m, p) = (model.m(), model.p());
    assert_eq!(observation.m(), m, "solver: observation length mismatch");
    assert_eq!(noise.m(), m, "solver: noise length mismatch");
    assert!(n_iterations >= 1, "solver: need at least one iteration");
    assert!(v_th >= 0.0, "solver: negative residual threshold");

    let mut theta = match theta0 {
        Some(t) => {
            assert_eq!(t.len(), p, "solver: start vector dimension mismatch");
            t.clone()
        }
        None => DenseVector::zeros(p),
    };

    let row_bounds: Vec<f64> = (0..m)
        .map(|i| {
            let h = model.row_vector(i);
            match ka {
                Some((weights, prior)) => {
                    max_step_width(&h, noise.weight(i), weights.a(i), prior.lambda1_inv())
                }
                None => max_step_width(&h, noise.weight(i), 0.0, 0.0),
            }
        })
        .collect();
    let mut controller = StepController::new(row_bounds, v_th, n_iterations);

    let theta_true = observation.theta_true.as_ref();
    let tracing = mode != TraceMode::Off && theta_true.is_some();
    let instrumented = mode == TraceMode::Instrumented && theta_true.is_some();
    let mut squared_errors = Vec::new();
    let mut error_vectors = Vec::new();
    let mut mu_values = Vec::new();
    if tracing {
        let e0 = theta.sub(theta_true.unwrap());
        squared_errors.push(e0.squared_norm());
        if instrumented {
            error_vectors.push(e0);
        }
    }

    for k in 1..=n_iterations {
        let row = cyclic_index(k, m) - 1;
        let h = model.row(row);
        let v = row_residual(h, &theta, observation.y[row]);
        let mu = controller.mu_for(k, row, v);
        let prior_terms = ka.map(|(weights, prior)| (weights.a(row), prior));
        apply_update(&mut theta, h, noise.weight(row), v, prior_terms, mu);
        if !theta.is_finite() {
            return Err(Error::NonFiniteIterate { iteration: k });
        }
        if tracing {
            let e = theta.sub(theta_true.unwrap());
            squared_errors.push(e.squared_norm());
            if instrumented {
                error_vectors.push(e);
                mu_values.push(mu);
            }
        }
    }

    let trace = if tracing {
        Some(ErrorTrace {
            squared_errors,
            error_vectors: if instrumented { Some(error_vectors) } else { None },
            mu_values: if instrumented { Some(mu_values) } else { None },
        })
    } else {
        None
    };
    Ok(SolveReport {
        estimate: theta,
        trace,
        iterations_run: n_iterations,
        decay_started_at: controller.decay_started_at(),
    })
}
