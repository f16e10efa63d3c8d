//! Runs the identification experiment for `D = x1 - 2` and prints the
//! probability of each label at every sweep time.
//!
//! cargo run --release -p adia-core --example identify

use adia_core::criterion::{run_experiment, ExperimentConfig};
use adia_core::{Boundary, C64};

fn main() -> adia_core::Result<()> {
    let bc = Boundary::antiperiodic(C64::new(1.0, 0.0))?;
    let config = ExperimentConfig::single_mode("x1 - 2", C64::new(1.0, 0.0), 12, bc);
    let report = run_experiment::<f64>(&config)?;

    println!("ground label {} with energy {}", report.label_string(report.ground_index), report.ground_energy);
    for row in &report.sweep {
        let top = row
            .probabilities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, p)| format!("{} ({p:.4})", report.label_string(i)))
            .unwrap_or_default();
        println!("T = {:>5}  steps {:>5}  most likely {top}  {:?}", row.t, row.num_steps, row.verdict);
    }
    println!("verdict {:?}, solution {:?}", report.verdict, report.solution);
    if let Some(gap) = report.min_gap {
        println!("smallest gap on the scan grid {gap:.4e}");
    }
    Ok(())
}
