//! Monte Carlo check that the Hoeffding certificates fail no more often
//! than their stated δ.

use oraclebound::sim::{run_coverage_experiment, SimulationConfig};

fn main() -> oraclebound::Result<()> {
    let config = SimulationConfig::homogeneous(500, 3, 5, 0.8, 7).with_model(0.9);
    let report = run_coverage_experiment(&config, &[0.01, 0.02, 0.03, 0.05], 10_000)?;
    println!(
        "K = {}, N = {}, {} replicates; population U = {:.4}, L = {:.4}",
        report.k,
        report.n,
        report.replicates,
        report.population_upper,
        report.population_lower.unwrap_or(f64::NAN)
    );
    println!(
        "{:>6} {:>8} {:>8} {:>10} {:>10}",
        "t", "δ", "σ", "upper", "lower"
    );
    for row in &report.rows {
        println!(
            "{:>6} {:>8.4} {:>8.4} {:>10.4} {:>10.4}",
            row.t,
            row.delta,
            row.sigma,
            row.upper_rate,
            row.lower_rate.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
