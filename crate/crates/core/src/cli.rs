//! Command-line front end.
//!
//! Exit codes: 0 on success (a "not certified" verdict is a success),
//! 2 for usage and input errors, 3 when an internal invariant fails.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::aggregate::{aggregate, AggregationRule};
use crate::agreement::agreement_matrix;
use crate::bounds::bounds_report;
use crate::certify::{
    certify_against, certify_values, CertifyOptions, Method, UpperStatistic, DEFAULT_ITERATIONS,
    DEFAULT_LEARNING_RATE,
};
use crate::data::{
    ingest_dataset, Dataset, IngestOptions, LabelColumn, LabelVocabulary, MissingPolicy,
    SentimentScheme,
};
use crate::error::Error;
use crate::report::{self, Report, RunManifest};
use crate::sim::{run_convergence_experiment, simulate, write_convergence_csv, SimulationConfig};
use crate::validate::assumption_report;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "oraclebound",
    version,
    about = "Bound annotator and model oracle accuracy from inter-annotator agreement"
)]
pub struct Cli {
    /// Output format (each command has its own default).
    #[arg(long, global = true, value_enum)]
    pub output: Option<OutputFormat>,
    /// Overrides the seed of simulation configs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pairwise agreement matrix of the annotators.
    Agreement(DatasetArgs),
    /// Upper bounds, the model lower bound and the margin.
    Bounds {
        #[command(flatten)]
        data: DatasetArgs,
        #[command(flatten)]
        reference: ReferenceArgs,
    },
    /// Confidence score that the model beats the average annotator.
    Certify(CertifyArgs),
    /// Check the bound assumptions against an oracle column.
    Validate {
        #[command(flatten)]
        data: DatasetArgs,
        #[command(flatten)]
        reference: ReferenceArgs,
    },
    /// Generate an oracle-known dataset from a JSON config.
    Simulate {
        config: PathBuf,
        /// Write the CSV here (plus `<out>.manifest.json`) instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounds as a function of the number of annotators K.
    Sweep {
        config: PathBuf,
        /// `2..10` (inclusive) or a comma list such as `2,4,8`.
        #[arg(long, default_value = "2..10")]
        k_range: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Annotation CSV: sample_id,<annotators...>[,model][,oracle][,aggregate]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub ingest: IngestArgs,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Drop rows with empty cells instead of rejecting the file.
    #[arg(long)]
    pub drop_incomplete: bool,
    /// Fixed label vocabulary, comma separated, in index order.
    #[arg(long, value_delimiter = ',')]
    pub vocab: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct ReferenceArgs {
    /// `vote` for the aggregate, or the name of any column.
    #[arg(long, default_value = "vote")]
    pub reference: String,
    /// Aggregate by mean-then-bin with these per-class values instead of
    /// majority vote (ordinal vocabularies only).
    #[arg(long, value_delimiter = ',')]
    pub class_values: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "five")]
    pub bin_scheme: BinScheme,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BinScheme {
    Five,
    Two,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Annotation CSV with a `model` column. Omit when using --from-values.
    pub dataset: Option<PathBuf>,
    /// Certify from summary values: `L=<l_n> U=<u_n> N=<n>`.
    #[arg(
        long,
        num_args = 3,
        value_name = "KEY=VALUE",
        conflicts_with = "dataset"
    )]
    pub from_values: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "hms")]
    pub method: MethodArg,
    /// Required out-performance margin τ.
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    /// OMS step size.
    #[arg(long, default_value_t = DEFAULT_LEARNING_RATE)]
    pub lr: f64,
    /// OMS iterations.
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    pub iters: usize,
    /// Upper-bound statistic used as U_N.
    #[arg(long, value_enum, default_value = "empirical")]
    pub upper: UpperArg,
    #[command(flatten)]
    pub ingest: IngestArgs,
    #[command(flatten)]
    pub reference: ReferenceArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Hms,
    Oms,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UpperArg {
    Empirical,
    Theoretical,
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invariant(_) => EXIT_INTERNAL,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    ExitCode::from(code)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn ingest(path: &Path, args: &IngestArgs) -> CliResult<Dataset> {
    let vocabulary = args
        .vocab
        .as_ref()
        .map(|v| LabelVocabulary::new(v.iter().cloned()))
        .transpose()?;
    let options = IngestOptions {
        missing: if args.drop_incomplete {
            MissingPolicy::Drop
        } else {
            MissingPolicy::Reject
        },
        vocabulary,
    };
    Ok(ingest_dataset(path, &options)?)
}

fn rule(args: &ReferenceArgs) -> AggregationRule {
    match &args.class_values {
        Some(values) => AggregationRule::MeanThenBin {
            class_values: values.clone(),
            scheme: match args.bin_scheme {
                BinScheme::Five => SentimentScheme::FiveClass,
                BinScheme::Two => SentimentScheme::TwoClass,
            },
        },
        None => AggregationRule::default(),
    }
}

/// Resolves `--reference`; returns the column and the aggregation rule
/// description when the aggregate was used.
fn reference(ds: &Dataset, args: &ReferenceArgs) -> CliResult<(LabelColumn, Option<String>)> {
    if args.reference == "vote" {
        let rule = rule(args);
        Ok((aggregate(&ds.matrix, &rule)?, Some(rule.describe())))
    } else {
        Ok((ds.column_by_name(&args.reference)?, None))
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, manifest: RunManifest, body: T) -> CliResult {
    let report = Report { manifest, body };
    serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| usage(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match &cli.command {
        Command::Agreement(data) => {
            let ds = ingest(&data.dataset, &data.ingest)?;
            report_dropped(&ds, err)?;
            let am = agreement_matrix(&ds.matrix);
            let manifest = RunManifest::new(
                "agreement",
                vec![path_string(&data.dataset)],
                json!({ "drop_incomplete": data.ingest.drop_incomplete }),
                None,
            );
            match cli.output.unwrap_or(OutputFormat::Csv) {
                OutputFormat::Csv => am.write_csv(out)?,
                OutputFormat::Json => write_json(out, manifest, json!({ "agreement": am }))?,
                OutputFormat::Table => write!(out, "{}", report::agreement_table(&am))?,
            }
        }
        Command::Bounds { data, reference: r } => {
            let ds = ingest(&data.dataset, &data.ingest)?;
            report_dropped(&ds, err)?;
            let (reference, rule) = reference(&ds, r)?;
            let report = bounds_report(&ds.matrix, ds.model.as_ref(), &reference, rule.as_deref())?;
            let manifest = RunManifest::new(
                "bounds",
                vec![path_string(&data.dataset)],
                json!({ "reference": r.reference, "aggregation": rule }),
                None,
            );
            match cli.output.unwrap_or(OutputFormat::Json) {
                OutputFormat::Table => write!(out, "{}", report::bounds_table(&report))?,
                OutputFormat::Json => write_json(out, manifest, report)?,
                OutputFormat::Csv => return Err(usage("bounds supports --output json|table")),
            }
        }
        Command::Certify(args) => certify_command(cli, args, out, err)?,
        Command::Validate { data, reference: r } => {
            let ds = ingest(&data.dataset, &data.ingest)?;
            report_dropped(&ds, err)?;
            let oracle = ds.oracle.as_ref().ok_or(Error::MissingOracle)?;
            let (reference, rule) = reference(&ds, r)?;
            let report =
                assumption_report(&ds.matrix, &oracle.labels, &reference, ds.model.as_ref())?;
            let manifest = RunManifest::new(
                "validate",
                vec![path_string(&data.dataset)],
                json!({ "reference": r.reference, "aggregation": rule }),
                None,
            );
            match cli.output.unwrap_or(OutputFormat::Json) {
                OutputFormat::Table => write!(out, "{}", report::assumption_table(&report))?,
                OutputFormat::Json => write_json(out, manifest, report)?,
                OutputFormat::Csv => return Err(usage("validate supports --output json|table")),
            }
        }
        Command::Simulate { config, out: path } => {
            if matches!(cli.output, Some(OutputFormat::Json | OutputFormat::Table)) {
                return Err(usage("simulate writes CSV only"));
            }
            let config_data = load_config(config, cli.seed)?;
            let data = simulate(&config_data)?;
            let manifest = RunManifest::new(
                "simulate",
                vec![path_string(config)],
                serde_json::to_value(&config_data).map_err(|e| usage(e.to_string()))?,
                Some(config_data.seed),
            );
            match path {
                Some(path) => {
                    let file = create(path)?;
                    let mut file = BufWriter::new(file);
                    data.write_csv(&mut file)?;
                    file.flush()?;
                    write_sidecar(path, &manifest)?;
                }
                None => data.write_csv(out)?,
            }
        }
        Command::Sweep {
            config,
            k_range,
            out: path,
        } => {
            let config_data = load_config(config, cli.seed)?;
            let ks = parse_k_range(k_range)?;
            let rows = run_convergence_experiment(&config_data, &ks)?;
            let manifest = RunManifest::new(
                "sweep",
                vec![path_string(config)],
                json!({ "k_range": ks, "config": config_data }),
                Some(config_data.seed),
            );
            let mut sink: Box<dyn Write + '_> = match path {
                Some(path) => {
                    write_sidecar(path, &manifest)?;
                    Box::new(BufWriter::new(create(path)?))
                }
                None => Box::new(&mut *out),
            };
            match cli.output.unwrap_or(OutputFormat::Csv) {
                OutputFormat::Csv => write_convergence_csv(&rows, &mut sink)?,
                OutputFormat::Json => write_json(&mut sink, manifest, json!({ "rows": rows }))?,
                OutputFormat::Table => write!(sink, "{}", report::convergence_table(&rows))?,
            }
            sink.flush()?;
        }
    }
    Ok(())
}

fn certify_command(
    cli: &Cli,
    args: &CertifyArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let options = CertifyOptions {
        method: match args.method {
            MethodArg::Hms => Method::Hms,
            MethodArg::Oms => Method::Oms,
        },
        tau: args.tau,
        learning_rate: args.lr,
        iterations: args.iters,
        aggregation: rule(&args.reference),
        upper: match args.upper {
            UpperArg::Empirical => UpperStatistic::Empirical,
            UpperArg::Theoretical => UpperStatistic::Theoretical,
        },
    };
    let option_json = json!({
        "method": options.method,
        "tau": options.tau,
        "lr": options.learning_rate,
        "iters": options.iterations,
        "upper": options.upper,
        "reference": args.reference.reference,
    });
    let format = cli.output.unwrap_or(OutputFormat::Json);
    if format == OutputFormat::Csv {
        return Err(usage("certify supports --output json|table"));
    }

    match (&args.dataset, &args.from_values) {
        (None, Some(values)) => {
            let (l_n, u_n, n) = parse_from_values(values)?;
            let result = certify_values(l_n, u_n, n, &options)?;
            check_residual(result.constraint_residual())?;
            let manifest = RunManifest::new("certify", vec![], option_json, None);
            match format {
                OutputFormat::Table => {
                    write!(out, "{}", report::certification_table(&result, None))?;
                    writeln!(out, "{}", report::verdict(&result, None))?;
                }
                _ => {
                    write_json(out, manifest, &result)?;
                    writeln!(err, "{}", report::verdict(&result, None))?;
                }
            }
        }
        (Some(path), None) => {
            let ds = ingest(path, &args.ingest)?;
            report_dropped(&ds, err)?;
            let model = ds.model.as_ref().ok_or(Error::MissingModel)?;
            let (reference, rule) = reference(&ds, &args.reference)?;
            let cert = certify_against(&ds.matrix, model, &reference, rule.as_deref(), &options)?;
            let manifest = RunManifest::new("certify", vec![path_string(path)], option_json, None);
            match format {
                OutputFormat::Table => write!(out, "{}", report::certify_report_table(&cert))?,
                _ => {
                    writeln!(
                        err,
                        "{}",
                        report::verdict(&cert.result, Some(cert.upper_statistic))
                    )?;
                    write_json(out, manifest, cert)?;
                }
            }
        }
        _ => {
            return Err(usage(
                "certify needs either a dataset or --from-values L=.. U=.. N=..",
            ))
        }
    }
    Ok(())
}

fn check_residual(residual: Option<f64>) -> CliResult {
    match residual {
        Some(r) if r > 1e-9 => {
            Err(Error::Invariant(format!("margin constraint residual {r:e}")).into())
        }
        _ => Ok(()),
    }
}

fn report_dropped(ds: &Dataset, err: &mut dyn Write) -> CliResult {
    if ds.dropped_rows > 0 {
        writeln!(
            err,
            "warning: dropped {} incomplete row(s)",
            ds.dropped_rows
        )?;
    }
    Ok(())
}

fn create(path: &Path) -> CliResult<File> {
    File::create(path).map_err(|e| usage(format!("cannot create {}: {e}", path.display())))
}

fn write_sidecar(path: &Path, manifest: &RunManifest) -> CliResult {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    let file = create(Path::new(&name))?;
    serde_json::to_writer_pretty(file, manifest).map_err(|e| usage(e.to_string()))?;
    Ok(())
}

fn load_config(path: &Path, seed: Option<u64>) -> CliResult<SimulationConfig> {
    let mut config = SimulationConfig::from_path(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

/// `L=0.919 U=0.879 N=10000`, keys case-insensitive, any order.
pub fn parse_from_values(values: &[String]) -> CliResult<(f64, f64, u64)> {
    let (mut l, mut u, mut n) = (None, None, None);
    for value in values {
        let (key, v) = value
            .split_once('=')
            .ok_or_else(|| usage(format!("expected KEY=VALUE, got {value:?}")))?;
        let bad = || usage(format!("cannot parse {value:?}"));
        match key.trim().to_ascii_uppercase().as_str() {
            "L" => l = Some(v.trim().parse::<f64>().map_err(|_| bad())?),
            "U" => u = Some(v.trim().parse::<f64>().map_err(|_| bad())?),
            "N" => n = Some(v.trim().parse::<u64>().map_err(|_| bad())?),
            _ => {
                return Err(usage(format!(
                    "unknown key in {value:?}; expected L, U or N"
                )))
            }
        }
    }
    match (l, u, n) {
        (Some(l), Some(u), Some(n)) => Ok((l, u, n)),
        _ => Err(usage("--from-values needs L=.., U=.. and N=..")),
    }
}

/// `a..b` (inclusive) or `a,b,c`.
pub fn parse_k_range(spec: &str) -> CliResult<Vec<usize>> {
    let bad = |_| usage(format!("cannot parse k-range {spec:?}"));
    let ks: Vec<usize> = if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(bad)?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(bad)?;
        (lo..=hi).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(bad))
            .collect::<CliResult<_>>()?
    };
    if ks.is_empty() {
        return Err(usage(format!("k-range {spec:?} is empty")));
    }
    Ok(ks)
}
