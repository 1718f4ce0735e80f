//! Pairwise agreement between annotators of a CSV file.
//!
//! cargo run --example agreement_matrix [path.csv]

use oraclebound::agreement::agreement_matrix;
use oraclebound::data::{ingest_dataset, IngestOptions};
use oraclebound::report::agreement_table;

fn main() -> oraclebound::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/reviews.csv").to_string()
    });
    let ds = ingest_dataset(&path, &IngestOptions::default())?;
    println!(
        "{} samples, {} annotators, classes {:?}\n",
        ds.matrix.n_samples(),
        ds.matrix.n_annotators(),
        ds.matrix.vocab().classes()
    );
    let am = agreement_matrix(&ds.matrix);
    print!("{}", agreement_table(&am));
    println!("mean off-diagonal agreement {:.4}", am.mean_off_diagonal());
    Ok(())
}
