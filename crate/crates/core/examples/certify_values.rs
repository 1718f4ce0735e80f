//! Confidence scores from summary statistics alone, with both ways of
//! splitting the margin.

use oraclebound::certify::{
    confidence_hms, confidence_oms, DEFAULT_ITERATIONS, DEFAULT_LEARNING_RATE,
};
use oraclebound::report::format_score;

fn main() -> oraclebound::Result<()> {
    println!(
        "{:>6} {:>6} {:>6} {:>8} {:>8}",
        "L_N", "U_N", "N", "HMS", "OMS"
    );
    for (l, u, n) in [
        (0.971, 0.939, 1821),
        (0.899, 0.879, 10_000),
        (0.919, 0.879, 10_000),
        (0.949, 0.939, 1821),
    ] {
        let hms = confidence_hms(l, u, n, 0.0)?;
        let oms = confidence_oms(l, u, n, 0.0, DEFAULT_LEARNING_RATE, DEFAULT_ITERATIONS)?;
        let show = |s: Option<f64>| s.map_or("—".to_string(), format_score);
        println!(
            "{l:>6} {u:>6} {n:>6} {:>8} {:>8}",
            show(hms.score),
            show(oms.score)
        );
    }

    // A required out-performance margin eats into the slack.
    println!("\nL_N = 0.919, U_N = 0.879, N = 10000:");
    for tau in [0.0, 0.01, 0.02, 0.03] {
        let r = confidence_hms(0.919, 0.879, 10_000, tau)?;
        println!(
            "  τ = {tau:<5} {:?} S = {}",
            r.status,
            r.score.map_or("—".into(), format_score)
        );
    }
    Ok(())
}
