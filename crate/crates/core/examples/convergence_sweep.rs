//! How the bounds tighten as annotators are added.
//!
//! Columns are nested: the run for K annotators contains the run for K − 1.

use oraclebound::bounds::convergence_ratio;
use oraclebound::report::convergence_table;
use oraclebound::sim::{run_convergence_experiment, SimulationConfig};

fn main() -> oraclebound::Result<()> {
    let config = SimulationConfig::from_path(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/data/sweep.json"
    ))?;
    let ks: Vec<usize> = (2..=config.annotators.len()).collect();
    let rows = run_convergence_experiment(&config, &ks)?;
    print!("{}", convergence_table(&rows));

    println!("\nU(t)/U(e) at uniform agreement 0.8:");
    for k in [2, 5, 10, 50, 100] {
        println!("  K = {k:<3} {:.6}", convergence_ratio(k, 0.8)?);
    }
    Ok(())
}
