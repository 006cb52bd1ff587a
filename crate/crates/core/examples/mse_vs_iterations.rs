//! The error-vs-iteration experiment at reduced trial count: average
//! squared error of the iterative solvers per iteration next to the
//! constant LS/MAP oracle columns, for both solver families.

use ka_solve::harness::{paper_preset, run_experiment};

fn main() -> ka_solve::Result<()> {
    for name in ["fig2a", "fig4a"] {
        let config = paper_preset(name, Some(200))?;
        let table = run_experiment(&config)?;
        let col = |want: &str| {
            &table
                .columns
                .iter()
                .find(|c| c.name == want)
                .expect("known column")
                .values
        };
        let (plain, aided) = if name == "fig2a" {
            ("kaczmarz", "ka_kaczmarz")
        } else {
            ("lms", "ka_lms")
        };

        println!("{name}: m = {}, p = {}, {} iterations, {} trials",
            config.m, config.p, config.n_iterations, config.trials);
        println!("{:>6} {:>12} {:>12}", "k", plain, aided);
        let n = config.n_iterations;
        for k in [0, n / 10, n / 4, n / 2, n] {
            println!("{k:>6} {:>12.6} {:>12.6}", col(plain)[k], col(aided)[k]);
        }
        println!("{:>6} {:>12.6} {:>12.6}   (ls / map oracle columns)",
            "-", col("ls")[0], col("map")[0]);
        println!("analytic MAP error, trial averaged: {:.6}\n",
            table.metadata.analytic_map_mse[0]);
    }
    println!("the CLI writes the same tables: ka-solve preset --name fig2a --out fig2a.csv");
    Ok(())
}
