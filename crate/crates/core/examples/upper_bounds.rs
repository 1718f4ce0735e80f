//! Upper bounds on the average annotator, lower bound on the model.
//!
//! The first part works on a real file; the second shows how the two upper
//! bounds relate when all annotators agree at the same rate.

use oraclebound::aggregate::majority_vote;
use oraclebound::bounds::{bounds_report, upper_bounds_from_mean_agreement};
use oraclebound::data::{ingest_dataset, IngestOptions};
use oraclebound::report::bounds_table;

fn main() -> oraclebound::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/reviews.csv");
    let ds = ingest_dataset(path, &IngestOptions::default())?;
    let vote = majority_vote(&ds.matrix);
    let report = bounds_report(&ds.matrix, ds.model.as_ref(), &vote, Some("majority vote"))?;
    print!("{}", bounds_table(&report));

    println!("\nuniform agreement p̄ for K annotators:");
    println!("{:>3} {:>6} {:>8} {:>8}", "K", "p̄", "U(t)", "U(e)");
    for (k, u_e) in [(3, 0.939), (3, 0.660), (5, 0.879)] {
        let p = u_e * u_e;
        let (u_t, u_e) = upper_bounds_from_mean_agreement(k, p)?;
        println!("{k:>3} {p:>6.3} {u_t:>8.4} {u_e:>8.4}");
    }
    Ok(())
}
