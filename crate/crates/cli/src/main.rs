use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use medialcorr::coefficients::BetaIj;
use medialcorr::data_io::{
    load_csv, render_report, save_batch_csv, ColumnSelector, CsvSpec, ReportFormat,
};
use medialcorr::subset::parse_one_based;
use medialcorr::validation::{run_suite, Suite, ValidationOptions};
use medialcorr::{
    beta_ij, bootstrap_ci, build_orthant_table, coefficients_from_table, empirical_coefficients,
    sample, strong_concordance_check, CoefficientsReport, Copula, CopulaModel, Error, Seed,
};

#[derive(Parser)]
#[command(
    name = "medialcorr",
    version,
    about = "Multivariate medial correlation"
)]
struct Cli {
    /// Worker threads (default: number of logical processors).
    #[arg(long, global = true, env = "MEDIALCORR_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate coefficients from a CSV file.
    Estimate(EstimateArgs),
    /// Exact coefficients of a copula model.
    Exact(ExactArgs),
    /// Draw a seeded sample from a copula model and write it as CSV.
    Simulate(SimulateArgs),
    /// Run the built-in validation suites.
    Validate(ValidateArgs),
    /// Compare two models in the concordance and strong concordance orders.
    ConcordanceCheck(ConcordanceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Table => ReportFormat::Table,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Examples,
    Properties,
    All,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated header names or zero-based indices (default: all columns).
    #[arg(long)]
    columns: Option<String>,
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// The file has no header row.
    #[arg(long)]
    no_header: bool,
    /// Bootstrap replicates for percentile intervals (at least 100).
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    model: String,
    /// One-based coordinate set, e.g. `{1,2}`; requires --J.
    #[arg(long = "I", requires = "j")]
    i: Option<String>,
    #[arg(long = "J", requires = "i")]
    j: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, default_value_t = ValidationOptions::default().seed)]
    seed: u64,
    /// White-wine CSV; adds the published-table check to the examples suite.
    #[arg(long)]
    wine: Option<PathBuf>,
}

#[derive(Args)]
struct ConcordanceArgs {
    #[arg(long)]
    model_x: String,
    #[arg(long)]
    model_y: String,
    /// Grid points per axis.
    #[arg(long, default_value_t = 11)]
    grid: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    /// Computation or validation failed.
    Computation(String),
    /// Bad arguments that clap could not catch.
    Usage(String),
    /// Reading, writing or parsing input failed.
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io { .. }
            | Error::Csv(_)
            | Error::Cell { .. }
            | Error::Json(_)
            | Error::ModelSyntax { .. }
            | Error::InvalidData(_) => Failure::Input(msg),
            _ => Failure::Computation(msg),
        }
    }
}

type Outcome = Result<(), Failure>;

fn emit(text: &str, output: Option<&Path>) -> Outcome {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Input(format!("stdout: {e}")))
        }
    }
}

fn parse_model(text: &str) -> Result<CopulaModel, Failure> {
    Ok(text.parse::<CopulaModel>()?)
}

fn estimate(args: EstimateArgs) -> Outcome {
    let delimiter = u8::try_from(args.delimiter)
        .ok()
        .filter(|d| matches!(d, b',' | b';'))
        .ok_or_else(|| {
            Failure::Usage(format!(
                "delimiter must be `,` or `;`, got `{}`",
                args.delimiter
            ))
        })?;
    let spec = CsvSpec {
        delimiter,
        has_header: !args.no_header,
        selected_columns: args
            .columns
            .as_deref()
            .map(ColumnSelector::parse_list)
            .unwrap_or_default(),
    };
    let data = load_csv(&args.input, &spec)?;
    let mut report = empirical_coefficients(&data)?;
    if let Some(b) = args.bootstrap {
        report.ci = Some(bootstrap_ci(&data, b, args.level, args.seed)?);
    }
    emit(
        &render_report(&report, args.format.into())?,
        args.output.as_deref(),
    )
}

fn exact(args: ExactArgs) -> Outcome {
    let model = parse_model(&args.model)?;
    let table = build_orthant_table(&model)?;
    let mut report: CoefficientsReport = coefficients_from_table(&table)?;
    if let (Some(i), Some(j)) = (&args.i, &args.j) {
        let d = model.dim();
        let i = parse_one_based(i, d)?;
        let j = parse_one_based(j, d)?;
        let one_based = |s: medialcorr::Subset| s.indices().map(|k| k + 1).collect();
        report.beta_ij = Some(BetaIj {
            i: one_based(i),
            j: one_based(j),
            value: beta_ij(&table, i, j)?,
        });
    }
    emit(
        &render_report(&report, args.format.into())?,
        args.output.as_deref(),
    )
}

fn simulate(args: SimulateArgs) -> Outcome {
    let model = parse_model(&args.model)?;
    let batch = sample(&model, args.n, Seed(args.seed))?;
    save_batch_csv(&batch, &args.output)?;
    Ok(())
}

fn validate(args: ValidateArgs) -> Outcome {
    let opts = ValidationOptions {
        suite: match args.suite {
            SuiteArg::Examples => Suite::Examples,
            SuiteArg::Properties => Suite::Properties,
            SuiteArg::All => Suite::All,
        },
        seed: args.seed,
        wine: args.wine,
    };
    let outcome = run_suite(&opts, |check| {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status}  {}: {}", check.name, check.detail);
    })?;
    if outcome.passed() {
        Ok(())
    } else {
        let failed = outcome
            .checks
            .iter()
            .find(|c| !c.passed)
            .map_or("", |c| c.name);
        Err(Failure::Computation(format!("validation failed: {failed}")))
    }
}

fn concordance_check(args: ConcordanceArgs) -> Outcome {
    let x = parse_model(&args.model_x)?;
    let y = parse_model(&args.model_y)?;
    let report = strong_concordance_check(&x, &y, args.grid)?;
    let mut text =
        serde_json::to_string_pretty(&report).map_err(|e| Failure::Computation(e.to_string()))?;
    text.push('\n');
    emit(&text, args.output.as_deref())
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Computation(e.to_string()))?;
    }
    match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Exact(a) => exact(a),
        Command::Simulate(a) => simulate(a),
        Command::Validate(a) => validate(a),
        Command::ConcordanceCheck(a) => concordance_check(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (code, msg) = match failure {
                Failure::Computation(m) => (1, m),
                Failure::Usage(m) => (2, m),
                Failure::Input(m) => (3, m),
            };
            eprintln!("medialcorr: {msg}");
            ExitCode::from(code)
        }
    }
}
