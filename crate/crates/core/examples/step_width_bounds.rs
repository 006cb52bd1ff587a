//! The step-width bound and why it is safe: at mu = 1 / (w ||h||^2 +
//! a lambda1) the error-propagation matrix M = I - mu (h w h' + a C^-1)
//! keeps its whole spectrum inside [0, 1), so every update contracts
//! the deterministic part of the error.

use ka_solve::kaczmarz::{error_propagation_matrix, max_step_width};
use ka_solve::model::{generate_random_model_with, trial_rng, GaussianPrior};
use ka_solve::numerics::largest_eigenvalue;

fn main() -> ka_solve::Result<()> {
    let mut rng = trial_rng(16, 0);
    let (m, p) = (8, 5);
    let model = generate_random_model_with(m, p, &mut rng);
    let prior = GaussianPrior::scaled_identity(p, 0.1, None)?;
    let (w, a) = (1.0, 1.0 / m as f64);

    println!("per-row bounds for an {m}x{p} system, w = {w}, a = 1/{m}, C = 0.1 I");
    println!("lambda1(C^-1) = {}\n", prior.lambda1_inv());
    println!("{:>4} {:>12} {:>12} {:>14}", "row", "||h||^2", "mu_bound", "lambda_max(M)");
    let mut global = f64::INFINITY;
    for i in 0..m {
        let h = model.row_vector(i);
        let mu = max_step_width(&h, w, a, prior.lambda1_inv());
        let prop = error_propagation_matrix(&h, w, a, &prior, mu);
        // with a scaled-identity prior the top eigenvalue of M has
        // multiplicity p - 1, so the power iteration settles immediately
        let top = largest_eigenvalue(&prop, 1e-9)?;
        println!("{i:>4} {:>12.5} {:>12.6} {:>14.12}", h.squared_norm(), mu, top);
        assert!(top < 1.0, "spectrum must stay below 1");
        global = global.min(mu);
    }
    println!("\nschedule seed: the decay phase starts from the global bound {global:.6}");

    // pushing mu past the bound lets an eigenvalue of M leave [0, 1):
    // the power iteration then locks onto it, since it dominates by
    // magnitude
    let h = model.row_vector(0);
    let mu = max_step_width(&h, w, a, prior.lambda1_inv());
    for factor in [1.0, 1.5, 2.0, 2.5] {
        let prop = error_propagation_matrix(&h, w, a, &prior, mu * factor);
        // lambda_min(M) = 1 - mu_eff (w ||h||^2 + a lambda1) for this prior
        let lambda_min = 1.0 - mu * factor * (w * h.squared_norm() + a * prior.lambda1_inv());
        let dominant = largest_eigenvalue(&prop, 1e-9)?;
        println!("mu x {factor}: lambda_min = {lambda_min:>8.4}, dominant eigenvalue = {dominant:.4}");
    }
    Ok(())
}
