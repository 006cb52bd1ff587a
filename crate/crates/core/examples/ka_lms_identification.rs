//! System identification with the LMS filters: estimate an impulse
//! response from one pass over noisy input/output samples, with and
//! without the prior term. The prior matters most when the noise is
//! loud and the data short.

use ka_solve::lms::{run_ka_lms, run_lms, APolicy, MuPolicy, TraceMode};
use ka_solve::model::{
    calibrate_noise, convolution_matrix, convolution_rows, observe_with, sample_parameter_with,
    trial_rng, GaussianPrior, LinearModel,
};
use ka_solve::numerics::DenseVector;
use rand::Rng;

fn main() -> ka_solve::Result<()> {
    let mut rng = trial_rng(41, 0);
    let (m, p) = (50, 5);
    let prior = GaussianPrior::scaled_identity(p, 0.1, None)?;
    let theta = sample_parameter_with(&prior, &mut rng);

    let mut x = DenseVector::zeros(m);
    for i in 0..m {
        x[i] = rng.gen::<f64>();
    }
    let model = LinearModel::new(convolution_matrix(&x, p))?;
    let noise = calibrate_noise(&model, &prior, -2.0);
    let obs = observe_with(&model, &theta, &noise, &mut rng);

    let stream = || {
        convolution_rows(&x, p)
            .into_iter()
            .zip(obs.y.as_slice().iter().copied())
    };
    let plain = run_lms(stream(), &noise, m, None, Some(&theta), TraceMode::Errors)?;
    let aided = run_ka_lms(
        stream(), &noise, &prior, APolicy::Uniform { m }, MuPolicy::TaperedBound, m, None,
        Some(&theta), TraceMode::Errors,
    )?;

    println!("impulse response of length {p} from {m} samples at -2 dB\n");
    println!("{:>6} {:>12} {:>12}", "k", "lms", "ka_lms");
    let pe = &plain.trace.as_ref().unwrap().squared_errors;
    let ae = &aided.trace.as_ref().unwrap().squared_errors;
    for k in [0, 10, 20, 30, 40, 50] {
        println!("{k:>6} {:>12.6} {:>12.6}", pe[k], ae[k]);
    }

    println!("\n{:>10} {:>10} {:>10}", "truth", "lms", "ka_lms");
    for i in 0..p {
        println!("{:>10.4} {:>10.4} {:>10.4}", theta[i], plain.estimate[i], aided.estimate[i]);
    }

    // one draw is noisy either way; the prior's edge shows up on average
    let trials = 200;
    let (mut plain_sum, mut aided_sum) = (0.0, 0.0);
    for t in 0..trials {
        let mut rng = trial_rng(41, 1 + t);
        let theta = sample_parameter_with(&prior, &mut rng);
        let mut x = DenseVector::zeros(m);
        for i in 0..m {
            x[i] = rng.gen::<f64>();
        }
        let model = LinearModel::new(convolution_matrix(&x, p))?;
        let noise = calibrate_noise(&model, &prior, -2.0);
        let obs = observe_with(&model, &theta, &noise, &mut rng);
        let stream = || {
            convolution_rows(&x, p)
                .into_iter()
                .zip(obs.y.as_slice().iter().copied())
        };
        let plain = run_lms(stream(), &noise, m, None, None, TraceMode::Off)?;
        let aided = run_ka_lms(
            stream(), &noise, &prior, APolicy::Uniform { m }, MuPolicy::TaperedBound, m, None,
            None, TraceMode::Off,
        )?;
        plain_sum += plain.estimate.sub(&theta).squared_norm();
        aided_sum += aided.estimate.sub(&theta).squared_norm();
    }
    println!("\naveraged over {trials} fresh streams at -2 dB:");
    println!("  lms    {:.4}", plain_sum / trials as f64);
    println!("  ka_lms {:.4}", aided_sum / trials as f64);
    Ok(())
}
