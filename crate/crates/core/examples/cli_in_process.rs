//! Drives the command-line interface from Rust, as the binary would.

fn main() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = oraclebound::cli::run(
        [
            "oraclebound",
            "--output",
            "table",
            "certify",
            "--method",
            "oms",
            "--from-values",
            "L=0.899",
            "U=0.879",
            "N=10000",
        ],
        &mut out,
        &mut err,
    );
    print!("{}", String::from_utf8_lossy(&out));
    eprint!("{}", String::from_utf8_lossy(&err));
    println!("exit code {code}");
}
