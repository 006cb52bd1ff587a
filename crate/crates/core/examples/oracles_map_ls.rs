//! Closed-form baselines on one random problem: weighted least squares,
//! the MAP/LMMSE estimate, the cost they minimize, and the analytic MAP
//! error the Monte-Carlo curves are judged against.

use ka_solve::batch;
use ka_solve::model::{
    calibrate_noise, generate_random_model_with, observe_with, sample_parameter_with, trial_rng,
    GaussianPrior,
};

fn main() -> ka_solve::Result<()> {
    let mut rng = trial_rng(2024, 0);
    let (m, p) = (50, 5);
    let model = generate_random_model_with(m, p, &mut rng);
    let prior = GaussianPrior::scaled_identity(p, 0.1, None)?;
    let theta = sample_parameter_with(&prior, &mut rng);

    println!("one {m}x{p} problem, prior C = 0.1 I, parameter drawn from the prior\n");
    println!("{:>8} {:>12} {:>12} {:>14}", "snr_db", "ls_sq_err", "map_sq_err", "analytic_map");
    for snr_db in [-10.0, 0.0, 10.0] {
        let noise = calibrate_noise(&model, &prior, snr_db);
        let obs = observe_with(&model, &theta, &noise, &mut rng);
        let ls = batch::ls_estimate(&model, &obs, &noise)?;
        let map = batch::map_estimate(&model, &obs, &noise, &prior)?;
        let analytic = batch::map_bayes_mse(&model, &noise, &prior)?;
        println!(
            "{snr_db:>8} {:>12.6} {:>12.6} {:>14.6}",
            ls.sub(&theta).squared_norm(),
            map.sub(&theta).squared_norm(),
            analytic,
        );
    }

    // the MAP point is the minimizer of the joint quadratic cost: both
    // gradient components cancel there
    let noise = calibrate_noise(&model, &prior, 0.0);
    let obs = observe_with(&model, &theta, &noise, &mut rng);
    let map = batch::map_estimate(&model, &obs, &noise, &prior)?;
    let at_map = batch::cost(&map, &model, &obs, &noise, &prior);
    let grad_norm = batch::gradient(&map, &model, &obs, &noise, &prior).norm();
    println!("\ncost at the MAP point: measurement {:.6} + prior {:.6} = {:.6}",
        at_map.measurement_cost, at_map.prior_cost, at_map.total);
    println!("gradient norm there: {grad_norm:.3e} (zero up to the solve tolerance)");
    Ok(())
}
