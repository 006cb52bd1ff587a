//! Linear Gaussian observation model: y = H theta + n with a Gaussian
//! prior on theta and independent (diagonal-covariance) noise.
//!
//! Also provides seeded random problem generation, SNR calibration, and
//! tapped-delay (convolution-matrix) row construction for the LMS path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{self, DenseMatrix, DenseVector};

/// Relative accuracy requested from the power iteration that caches the
/// largest eigenvalue of the prior precision matrix.
const LAMBDA1_TOL: f64 = 1e-10;

/// Measurement matrix H with row access. Rows must be nonzero so the
/// step-width bounds 1/(w ||h||^2 + ...) stay finite even without a prior
/// term.
#[derive(Debug, Clone)]
pub struct LinearModel {
    h: DenseMatrix,
}

impl LinearModel {
    pub fn new(h: DenseMatrix) -> Result<Self> {
        for i in 0..h.rows() {
            if h.row(i).iter().all(|&x| x == 0.0) {
                return Err(Error::InvalidInput(format!(
                    "model row {i} is all zeros; every row needs a nonzero norm"
                )));
            }
        }
        Ok(Self { h })
    }

    pub fn m(&self) -> usize {
        self.h.rows()
    }

    pub fn p(&self) -> usize {
        self.h.cols()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.h
    }

    /// Row i as a slice (0-based).
    pub fn row(&self, i: usize) -> &[f64] {
        self.h.row(i)
    }

    pub fn row_vector(&self, i: usize) -> DenseVector {
        self.h.row_vector(i)
    }
}

/// Gaussian prior N(mean, cov) with the quantities the solvers need
/// cached at construction: the precision matrix, its largest eigenvalue,
/// and the Cholesky factor of cov for sampling.
#[derive(Debug, Clone)]
pub struct GaussianPrior {
    mean: DenseVector,
    cov: DenseMatrix,
    cov_inv: DenseMatrix,
    lambda1_inv: f64,
    chol: DenseMatrix,
}

impl GaussianPrior {
    /// Fails with the underlying numerics error when `cov` is not
    /// symmetric positive definite; callers that want automatic repair
    /// should pass the covariance through
    /// [`numerics::repair_positive_definite`] first.
    pub fn new(mean: DenseVector, cov: DenseMatrix) -> Result<Self> {
        if cov.rows() != mean.len() {
            return Err(Error::InvalidInput(format!(
                "prior mean has length {} but covariance is {}x{}",
                mean.len(),
                cov.rows(),
                cov.cols()
            )));
        }
        let cov_inv = numerics::spd_inverse(&cov)?;
        let lambda1_inv = numerics::largest_eigenvalue(&cov_inv, LAMBDA1_TOL)?;
        let chol = numerics::cholesky_lower(&cov)?;
        Ok(Self {
            mean,
            cov,
            cov_inv,
            lambda1_inv,
            chol,
        })
    }

    /// Prior with covariance c * I and the given mean (zero if None).
    pub fn scaled_identity(p: usize, c: f64, mean: Option<DenseVector>) -> Result<Self> {
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::InvalidInput(format!(
                "covariance scale must be finite and > 0, got {c}"
            )));
        }
        let mean = mean.unwrap_or_else(|| DenseVector::zeros(p));
        Self::new(mean, DenseMatrix::scaled_identity(p, c))
    }

    pub fn mean(&self) -> &DenseVector {
        &self.mean
    }

    pub fn cov(&self) -> &DenseMatrix {
        &self.cov
    }

    pub fn cov_inv(&self) -> &DenseMatrix {
        &self.cov_inv
    }

    /// Largest eigenvalue of the precision matrix cov^-1.
    pub fn lambda1_inv(&self) -> f64 {
        self.lambda1_inv
    }

    pub fn p(&self) -> usize {
        self.mean.len()
    }

    /// cov^-1 (theta - mean), the prior part of the (half-)gradient.
    pub fn precision_pull(&self, theta: &DenseVector) -> DenseVector {
        self.cov_inv.matvec(&theta.sub(&self.mean))
    }
}

/// Per-row noise variances and their reciprocals w_i = 1/sigma_i^2.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    variances: Vec<f64>,
    weights: Vec<f64>,
}

impl NoiseModel {
    pub fn new(variances: Vec<f64>) -> Result<Self> {
        if variances.is_empty() {
            return Err(Error::InvalidInput("noise model needs >= 1 row".into()));
        }
        if let Some(i) = variances.iter().position(|v| *v <= 0.0 || !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "noise variance {i} must be finite and > 0, got {}",
                variances[i]
            )));
        }
        let weights = variances.iter().map(|v| 1.0 / v).collect();
        Ok(Self { variances, weights })
    }

    /// Single variance for all m rows.
    pub fn homoscedastic(m: usize, variance: f64) -> Result<Self> {
        Self::new(vec![variance; m])
    }

    pub fn m(&self) -> usize {
        self.variances.len()
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.variances[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Prior-gradient weights a_i > 0 with sum 1.
#[derive(Debug, Clone)]
pub struct WeightScheme {
    a: Vec<f64>,
}

impl WeightScheme {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput("weight scheme needs >= 1 entry".into()));
        }
        if let Some(i) = a.iter().position(|x| *x <= 0.0 || !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "prior weight {i} must be finite and > 0, got {}",
                a[i]
            )));
        }
        let sum: f64 = a.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "prior weights must sum to 1 within 1e-12, got {sum}"
            )));
        }
        Ok(Self { a })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self, i: usize) -> f64 {
        self.a[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }
}

/// a_i = 1/m for all rows.
pub fn uniform_weights(m: usize) -> WeightScheme {
    assert!(m >= 1, "uniform_weights: m must be >= 1");
    WeightScheme {
        a: vec![1.0 / m as f64; m],
    }
}

/// Measurement vector, with the true parameter retained when it is known
/// (simulations) so solvers can record error traces.
#[derive(Debug, Clone)]
pub struct Observation {
    pub y: DenseVector,
    pub theta_true: Option<DenseVector>,
}

impl Observation {
    pub fn new(y: DenseVector, theta_true: Option<DenseVector>) -> Self {
        Self { y, theta_true }
    }

    pub fn m(&self) -> usize {
        self.y.len()
    }
}

/// Deterministic per-trial generator: one master seed, one independent
/// ChaCha stream per trial index. Trials can run in any order or in
/// parallel and still draw identical values.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// m x p matrix with i.i.d. entries uniform on [0,1).
pub fn generate_random_model(m: usize, p: usize, seed: u64) -> LinearModel {
    generate_random_model_with(m, p, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn generate_random_model_with(m: usize, p: usize, rng: &mut ChaCha8Rng) -> LinearModel {
    assert!(m >= 1 && p >= 1, "model dimensions must be >= 1");
    let mut data = Vec::with_capacity(m * p);
    for _ in 0..m * p {
        data.push(rng.gen::<f64>());
    }
    let h = DenseMatrix::new(m, p, data).expect("uniform entries are finite");
    // An all-zero row has probability ~2^-53 per entry; regenerate rather
    // than fail so callers never see it.
    LinearModel::new(h).unwrap_or_else(|_| generate_random_model_with(m, p, rng))
}

/// theta_T ~ N(mean, cov) via the cached Cholesky factor of cov.
pub fn sample_parameter(prior: &GaussianPrior, seed: u64) -> DenseVector {
    sample_parameter_with(prior, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_parameter_with(prior: &GaussianPrior, rng: &mut ChaCha8Rng) -> DenseVector {
    let p = prior.p();
    let mut z = DenseVector::zeros(p);
    for i in 0..p {
        z[i] = rng.sample(StandardNormal);
    }
    prior.mean.add(&prior.chol.matvec(&z))
}

/// Homoscedastic noise level matching a target SNR in dB, defined as
/// per-sample signal power over noise power:
///
/// ```text
/// sigma^2 = E[||H theta||^2] / (m * 10^(snr_db/10))
/// E[||H theta||^2] = trace(H' H (cov + mean mean'))   (exact)
/// ```
pub fn calibrate_noise(model: &LinearModel, prior: &GaussianPrior, snr_db: f64) -> NoiseModel {
    let sigma2 = calibrated_variance(model, prior, snr_db);
    NoiseModel::homoscedastic(model.m(), sigma2).expect("calibrated variance is positive")
}

pub(crate) fn calibrated_variance(model: &LinearModel, prior: &GaussianPrior, snr_db: f64) -> f64 {
    let signal_power = expected_signal_energy(model, prior);
    signal_power / (model.m() as f64 * 10f64.powf(snr_db / 10.0))
}

/// trace(H' H (cov + mean mean')) = trace(H' H cov) + ||H mean||^2.
fn expected_signal_energy(model: &LinearModel, prior: &GaussianPrior) -> f64 {
    let h = model.matrix();
    let p = model.p();
    let gram = h.transposed().mat_mul(h);
    let mut trace_term = 0.0;
    for i in 0..p {
        for j in 0..p {
            trace_term += gram[(i, j)] * prior.cov[(j, i)];
        }
    }
    trace_term + h.matvec(&prior.mean).squared_norm()
}

/// y = H theta_T + n with n_i ~ N(0, sigma_i^2) independent.
pub fn observe(
    model: &LinearModel,
    theta_true: &DenseVector,
    noise: &NoiseModel,
    seed: u64,
) -> Observation {
    observe_with(model, theta_true, noise, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn observe_with(
    model: &LinearModel,
    theta_true: &DenseVector,
    noise: &NoiseModel,
    rng: &mut ChaCha8Rng,
) -> Observation {
    assert_eq!(model.m(), noise.m(), "observe: noise rows mismatch");
    let mut y = model.matrix().matvec(theta_true);
    for i in 0..y.len() {
        let z: f64 = rng.sample(StandardNormal);
        y[i] += noise.variance(i).sqrt() * z;
    }
    Observation::new(y, Some(theta_true.clone()))
}

/// y = H theta_T exactly; the zero-noise contract used by tests and
/// consistency checks (NoiseModel itself requires sigma^2 > 0).
pub fn observe_noiseless(model: &LinearModel, theta_true: &DenseVector) -> Observation {
    Observation::new(model.matrix().matvec(theta_true), Some(theta_true.clone()))
}

/// Tapped-delay rows h_k = (x[k], x[k-1], ..., x[k-p+1]) with zero
/// prehistory (x[j] = 0 for j < 1), one row per input sample.
pub fn convolution_rows(input: &DenseVector, p: usize) -> Vec<DenseVector> {
    assert!(p >= 1, "convolution_rows: p must be >= 1");
    let n = input.len();
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let mut h = DenseVector::zeros(p);
        for j in 0..p {
            if k >= j {
                h[j] = input[k - j];
            }
        }
        rows.push(h);
    }
    rows
}

/// Stacks the tapped-delay rows into the N x p convolution matrix used by
/// the batch and Kaczmarz cross-checks. Bit-identical to stacking
/// `convolution_rows` output.
pub fn convolution_matrix(input: &DenseVector, p: usize) -> DenseMatrix {
    DenseMatrix::from_rows(&convolution_rows(input, p)).expect("rows are nonempty, equal length")
}
