//! The SNR sweep at reduced trial count: final average squared error of
//! each estimator across the decibel grid. The prior's edge over the
//! plain solvers concentrates at the low end.

use ka_solve::harness::{paper_preset, run_experiment};

fn main() -> ka_solve::Result<()> {
    for name in ["fig2b", "fig4b"] {
        let config = paper_preset(name, Some(150))?;
        let table = run_experiment(&config)?;
        let col = |want: &str| {
            &table
                .columns
                .iter()
                .find(|c| c.name == want)
                .expect("known column")
                .values
        };
        let (plain, aided) = if name == "fig2b" {
            ("kaczmarz", "ka_kaczmarz")
        } else {
            ("lms", "ka_lms")
        };

        println!("{name}: {} trials per grid point", config.trials);
        println!("{:>8} {:>12} {:>12} {:>12} {:>12} {:>9}",
            "snr_db", "ls", "map", plain, aided, "ka/plain");
        for (i, snr) in table.axis.iter().enumerate() {
            println!("{snr:>8} {:>12.5} {:>12.5} {:>12.5} {:>12.5} {:>9.3}",
                col("ls")[i], col("map")[i], col(plain)[i], col(aided)[i],
                col(aided)[i] / col(plain)[i]);
        }
        println!();
    }
    Ok(())
}
