//! Closed-form estimators and full-gradient descent for the linear
//! Gaussian model: weighted least squares, the MAP/LMMSE solution, the
//! quadratic cost J and its gradient, and the analytic Bayesian MSE of
//! the MAP estimator. These serve as the performance oracles the
//! row-action solvers are compared against.

use crate::error::{Error, Result};
use crate::model::{GaussianPrior, LinearModel, NoiseModel, Observation};
use crate::numerics::{self, DenseMatrix, DenseVector};

/// Iterate-norm guard for steepest descent; crossing it means the step
/// width is too large for the problem's curvature.
const DIVERGENCE_NORM: f64 = 1e12;

/// The two quadratic terms of J(theta) and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub measurement_cost: f64,
    pub prior_cost: f64,
    pub total: f64,
}

/// J(theta) = (y - H theta)' C_nn^-1 (y - H theta)
///          + (theta - mean)' cov^-1 (theta - mean).
pub fn cost(
    theta: &DenseVector,
    model: &LinearModel,
    observation: &Observation,
    noise: &NoiseModel,
    prior: &GaussianPrior,
) -> CostBreakdown {
    let r = model.matrix().matvec(theta).sub(&observation.y);
    let mut measurement_cost = 0.0;
    for i in 0..r.len() {
        measurement_cost += noise.weight(i) * r[i] * r[i];
    }
    let d = theta.sub(prior.mean());
    let prior_cost = d.dot(&prior.cov_inv().matvec(&d));
    CostBreakdown {
        measurement_cost,
        prior_cost,
        total: measurement_cost + prior_cost,
    }
}

/// Exact gradient of J including the factor 2; the iterative solvers
/// absorb that factor into their step widths and use half of this.
pub fn gradient(
    theta: &DenseVector,
    model: &LinearModel,
    observation: &Observation,
    noise: &NoiseModel,
    prior: &GaussianPrior,
) -> DenseVector {
    half_gradient(theta, model, observation, noise, prior).scale(2.0)
}

/// H' C_nn^-1 (H theta - y) + cov^-1 (theta - mean).
pub(crate) fn half_gradient(
    theta: &DenseVector,
    model: &LinearModel,
    observation: &Observation,
    noise: &NoiseModel,
    prior: &GaussianPrior,
) -> DenseVector {
    let mut r = model.matrix().matvec(theta).sub(&observation.y);
    for i in 0..r.len() {
        r[i] *= noise.weight(i);
    }
    let mut g = model.matrix().matvec_transposed(&r);
    let pull = prior.precision_pull(theta);
    for i in 0..g.len() {
        g[i] += pull[i];
    }
    g
}

/// H' C_nn^-1 H as an exactly symmetric matrix.
fn weighted_gram(model: &LinearModel, noise: &NoiseModel) -> DenseMatrix {
    let (m, p) = (model.m(), model.p());
    let mut gram = DenseMatrix::zeros(p, p);
    for i in 0..m {
        let w = noise.weight(i);
        let row = model.row(i);
        for a in 0..p {
            let wa = w * row[a];
            for b in a..p {
                gram[(a, b)] += wa * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    gram
}

/// H' C_nn^-1 y.
fn weighted_rhs(model: &LinearModel, observation: &Observation, noise: &NoiseModel) -> DenseVector {
    let mut scaled = observation.y.clone();
    for i in 0..scaled.len() {
        scaled[i] *= noise.weight(i);
    }
    model.matrix().matvec_transposed(&scaled)
}

/// MAP/LMMSE estimate: (H' C_nn^-1 H + cov^-1)^-1 (H' C_nn^-1 y + cov^-1 mean).
pub fn map_estimate(
    model: &LinearModel,
    observation: &Observation,
    noise: &NoiseModel,
    prior: &GaussianPrior,
) -> Result<DenseVector> {
    let p = model.p();
    let mut a = weighted_gram(model, noise);
    for i in 0..p {
        for j in 0..p {
            a[(i, j)] += prior.cov_inv()[(i, j)];
        }
    }
    let mut b = weighted_rhs(model, observation, noise);
    let prior_pull = prior.cov_inv().matvec(prior.mean());
    for i in 0..p {
        b[i] += prior_pull[i];
    }
    numerics::spd_solve(&a, &b)
}

/// Weighted least squares: (H' C_nn^-1 H)^-1 H' C_nn^-1 y. Fails with
/// NotPositiveDefinite when H is rank deficient.
pub fn ls_estimate(
    model: &LinearModel,
    observation: &Observation,
    noise: &NoiseModel,
) -> Result<DenseVector> {
    let a = weighted_gram(model, noise);
    let b = weighted_rhs(model, observation, noise);
    numerics::spd_solve(&a, &b)
}

/// Full-gradient descent on J with constant step width mu (the gradient's
/// factor 2 is absorbed into mu). Converges monotonically in J toward the
/// MAP estimate for mu <= 1 / lambda_max(H' C_nn^-1 H + cov^-1).
pub fn steepest_descent(
    model: &LinearModel,
    observation: &Observation,
    noise: &NoiseModel,
    prior: &GaussianPrior,
    mu: f64,
    iterations: usize,
    theta0: Option<&DenseVector>,
) -> Result<DenseVector> {
    assert!(mu > 0.0, "steepest_descent: mu must be > 0");
    let mut theta = theta0.cloned().unwrap_or_else(|| DenseVector::zeros(model.p()));
    for k in 1..=iterations {
        let g = half_gradient(&theta, model, observation, noise, prior);
        theta.axpy(-mu, &g);
        if !theta.is_finite() {
            return Err(Error::NonFiniteIterate { iteration: k });
        }
        let norm = theta.norm();
        if norm > DIVERGENCE_NORM {
            return Err(Error::Diverged { iteration: k, norm });
        }
    }
    Ok(theta)
}

/// Analytic Bayesian MSE of the MAP estimator:
/// trace((H' C_nn^-1 H + cov^-1)^-1). Equals the Monte-Carlo MSE of
/// map_estimate in the large-trial limit.
pub fn map_bayes_mse(model: &LinearModel, noise: &NoiseModel, prior: &GaussianPrior) -> Result<f64> {
    let p = model.p();
    let mut a = weighted_gram(model, noise);
    for i in 0..p {
        for j in 0..p {
            a[(i, j)] += prior.cov_inv()[(i, j)];
        }
    }
    let inv = numerics::spd_inverse(&a)?;
    Ok((0..p).map(|i| inv[(i, i)]).sum())
}
