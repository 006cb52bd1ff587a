//! Streaming LMS filters over tapped-delay rows: the classical filter
//! and the knowledge-aided variant with the same prior pull as the
//! Kaczmarz solver. No row is ever revisited; instead of the residual
//! trigger, the step width tapers linearly over the planned horizon.
//! Both filters share the Kaczmarz arithmetic kernel, so same-input
//! updates agree bit for bit across the two modules.

use crate::error::{Error, Result};
use crate::kaczmarz::{apply_update, row_residual};
use crate::model::{GaussianPrior, NoiseModel};
use crate::numerics::DenseVector;

pub use crate::kaczmarz::{ErrorTrace, SolveReport, TraceMode};

/// Prior share sequence a_k. Shares are positive and sum to one, either
/// exactly over a known horizon or in the limit of an endless stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum APolicy {
    /// a_k = 1/m for a horizon of m samples known in advance.
    Uniform { m: usize },
    /// a_k = (1 - r) r^(k-1); geometric tail for open-ended streams.
    Geometric { r: f64 },
}

impl APolicy {
    /// Default open-ended policy with a long memory.
    pub fn default_geometric() -> APolicy {
        APolicy::Geometric { r: 0.999 }
    }

    /// Share for 1-based sample index k.
    pub fn share(&self, k: usize) -> f64 {
        assert!(k >= 1, "APolicy::share: k is 1-based");
        match *self {
            APolicy::Uniform { m } => {
                assert!(m >= 1, "APolicy::Uniform: empty horizon");
                1.0 / m as f64
            }
            APolicy::Geometric { r } => {
                assert!(r > 0.0 && r < 1.0, "APolicy::Geometric: r must lie in (0, 1)");
                (1.0 - r) * r.powi(k as i32 - 1)
            }
        }
    }
}

/// Step-width policy for a streaming run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuPolicy {
    /// Per-sample upper bound scaled by (N - k + 1)/N: full width on the
    /// first sample, 1/N of it on the last.
    TaperedBound,
    /// Per-sample upper bound with no taper; used when a run must match
    /// the Kaczmarz bound-phase schedule exactly.
    RawBound,
}

/// Mutable filter state: the running estimate, how many samples have
/// been consumed, and the planned horizon.
#[derive(Debug, Clone)]
pub struct LmsState<'a> {
    theta_hat: DenseVector,
    k: usize,
    n_total: usize,
    prior: Option<&'a GaussianPrior>,
}

impl<'a> LmsState<'a> {
    /// Fresh state over p coefficients; the estimate starts at zero
    /// unless a start vector is supplied.
    pub fn new(
        p: usize,
        n_total: usize,
        prior: Option<&'a GaussianPrior>,
        theta0: Option<&DenseVector>,
    ) -> Self {
        assert!(n_total >= 1, "LmsState: empty horizon");
        if let Some(pr) = prior {
            assert_eq!(pr.p(), p, "LmsState: prior dimension mismatch");
        }
        let theta_hat = match theta0 {
            Some(t) => {
                assert_eq!(t.len(), p, "LmsState: start vector dimension mismatch");
                t.clone()
            }
            None => DenseVector::zeros(p),
        };
        LmsState { theta_hat, k: 0, n_total, prior }
    }

    pub fn theta_hat(&self) -> &DenseVector {
        &self.theta_hat
    }

    /// Samples consumed so far.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    /// Largest safe step width for the next sample: 1/(w ||h||^2 + a lambda1),
    /// or 0 for a zero row with no prior attached (the update is a no-op
    /// there anyway).
    pub fn sample_bound(&self, h: &DenseVector, w: f64, a: f64) -> f64 {
        assert!(w > 0.0 && a >= 0.0, "sample_bound: bad scalars");
        let lambda1 = match self.prior {
            Some(prior) => prior.lambda1_inv(),
            None => 0.0,
        };
        let denom = w * h.squared_norm() + a * lambda1;
        if denom > 0.0 {
            1.0 / denom
        } else {
            0.0
        }
    }
}

/// One filter update from sample (h, y_k): the Kaczmarz kernel applied
/// to a fresh row. Advances the sample counter. `a_k` only acts when the
/// state carries a prior.
pub fn ka_lms_step(state: &mut LmsState, h: &DenseVector, y_k: f64, w_k: f64, a_k: f64, mu_k: f64) {
    assert!(mu_k >= 0.0, "ka_lms_step: mu must be >= 0");
    assert!(a_k >= 0.0, "ka_lms_step: a must be >= 0");
    assert_eq!(h.len(), state.theta_hat.len(), "ka_lms_step: dimension mismatch");
    assert!(state.k < state.n_total, "ka_lms_step: horizon exhausted");
    let v = row_residual(h.as_slice(), &state.theta_hat, y_k);
    let prior_terms = state.prior.map(|prior| (a_k, prior));
    apply_update(&mut state.theta_hat, h.as_slice(), w_k, v, prior_terms, mu_k);
    state.k += 1;
}

/// Knowledge-aided LMS over a pulled row stream. Consumes exactly
/// `n_iterations` (h, y) pairs; the k-th sample uses noise weight k,
/// prior share a_k from the policy, and the policy's step width.
/// `theta_true` enables error tracing for synthetic runs.
#[allow(clippy::too_many_arguments)]
pub fn run_ka_lms<I>(
    row_stream: I,
    noise: &NoiseModel,
    prior: &GaussianPrior,
    a_policy: APolicy,
    mu_policy: MuPolicy,
    n_iterations: usize,
    theta0: Option<&DenseVector>,
    theta_true: Option<&DenseVector>,
    mode: TraceMode,
) -> Result<SolveReport>
where
    I: IntoIterator<Item = (DenseVector, f64)>,
{
    run_stream(
        row_stream,
        noise,
        Some((prior, a_policy)),
        mu_policy,
        n_iterations,
        theta0,
        theta_true,
        mode,
    )
}

/// Classical LMS baseline: the same run with the prior term removed and
/// the tapered bound policy (so comparisons isolate the prior's effect).
pub fn run_lms<I>(
    row_stream: I,
    noise: &NoiseModel,
    n_iterations: usize,
    theta0: Option<&DenseVector>,
    theta_true: Option<&DenseVector>,
    mode: TraceMode,
) -> Result<SolveReport>
where
    I: IntoIterator<Item = (DenseVector, f64)>,
{
    run_stream(
        row_stream,
        noise,
        None,
        MuPolicy::TaperedBound,
        n_iterations,
        theta0,
        theta_true,
        mode,
    )
}

#[allow(clippy::too_many_arguments)]
fn run_stream<I>(
    row_stream: I,
    noise: &NoiseModel,
    ka: Option<(&GaussianPrior, APolicy)>,
    mu_policy: MuPolicy,
    n_iterations: usize,
    theta0: Option<&DenseVector>,
    theta_true: Option<&DenseVector>,
    mode: TraceMode,
) -> Result<SolveReport>
where
    I: IntoIterator<Item = (DenseVector, f64)>,
{
    assert!(n_iterations >= 1, "run_stream: need at least one sample");
    assert!(noise.m() >= n_iterations, "run_stream: not enough noise variances");

    let mut stream = row_stream.into_iter();
    let (first_h, first_y) = stream.next().expect("run_stream: empty stream");
    let p = first_h.len();
    let prior = ka.map(|(prior, _)| prior);
    let mut state = LmsState::new(p, n_iterations, prior, theta0);

    let tracing = mode != TraceMode::Off && theta_true.is_some();
    let instrumented = mode == TraceMode::Instrumented && theta_true.is_some();
    let mut squared_errors = Vec::new();
    let mut error_vectors = Vec::new();
    let mut mu_values = Vec::new();
    if tracing {
        let e0 = state.theta_hat().sub(theta_true.unwrap());
        squared_errors.push(e0.squared_norm());
        if instrumented {
            error_vectors.push(e0);
        }
    }

    let mut next = Some((first_h, first_y));
    for k in 1..=n_iterations {
        let (h, y_k) = next.take().expect("run_stream: stream ended early");
        assert_eq!(h.len(), p, "run_stream: row length changed mid-stream");
        let w_k = noise.weight(k - 1);
        let a_k = match ka {
            Some((_, policy)) => policy.share(k),
            None => 0.0,
        };
        let bound = state.sample_bound(&h, w_k, a_k);
        let mu_k = match mu_policy {
            MuPolicy::TaperedBound => bound * ((n_iterations - k + 1) as f64 / n_iterations as f64),
            MuPolicy::RawBound => bound,
        };
        ka_lms_step(&mut state, &h, y_k, w_k, a_k, mu_k);
        if !state.theta_hat().is_finite() {
            return Err(Error::NonFiniteIterate { iteration: k });
        }
        if tracing {
            let e = state.theta_hat().sub(theta_true.unwrap());
            squared_errors.push(e.squared_norm());
            if instrumented {
                error_vectors.push(e);
                mu_values.push(mu_k);
            }
        }
        if k < n_iterations {
            next = stream.next();
            assert!(next.is_some(), "run_stream: stream ended early at sample {k}");
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
        estimate: state.theta_hat,
        trace,
        iterations_run: n_iterations,
        // streaming runs have no trigger event
        decay_started_at: None,
    })
}
