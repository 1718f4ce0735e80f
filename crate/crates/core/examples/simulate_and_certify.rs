//! Generate an oracle-known dataset and certify its model.
//!
//! Because the oracle is known, the certified claim can be checked
//! against the actual accuracies.

use oraclebound::aggregate::average_annotator_accuracy;
use oraclebound::certify::{certify, CertifyOptions, Method};
use oraclebound::report::certify_report_table;
use oraclebound::sim::{simulate, SimulationConfig};
use oraclebound::validate::oracle_accuracy;

fn main() -> oraclebound::Result<()> {
    let config = SimulationConfig::from_path(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/data/strong_model.json"
    ))?;
    let data = simulate(&config)?;
    let model = data.model.as_ref().expect("config sets model_accuracy");

    let options = CertifyOptions {
        method: Method::Oms,
        ..CertifyOptions::default()
    };
    let cert = certify(&data.matrix, model, &options)?;
    print!("{}", certify_report_table(&cert));

    println!(
        "\ntruth: model {:.4}, average annotator {:.4}",
        oracle_accuracy(&model.labels, &data.oracle.labels)?,
        average_annotator_accuracy(&data.matrix, &data.oracle.labels)?
    );
    Ok(())
}
