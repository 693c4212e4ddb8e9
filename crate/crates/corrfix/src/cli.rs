//! Command-line front end.
//!
//! Exit codes: 0 success (and, for `corr`/`check`, a valid correlation
//! matrix), 1 usage/IO/parse errors, 2 a valid run whose matrix is not a
//! correlation matrix, 3 numerical failure (non-convergence, bench
//! generation).
//!
//! Matrix output goes to `--output` when given (with the report on stdout),
//! otherwise the matrix goes to stdout and the report to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use corrfix_core::{
    apd_nearest, check_correlation, check_correlation_grid, diff_norms, sample_correlation, shrink_repair, ApdOptions,
    CheckTolerances, MissingPolicy, PairOverride, RepairResult, SymmetricMatrix, DEFAULT_EPSILON,
};

use crate::bench::{run_bench, BenchConfig};
use crate::io::{self, FormatError};
use crate::report::{bench_report, bench_table, check_report, norm_report, repair_report, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CORRELATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "corrfix", version, about = "Repair and validate correlation matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample correlation matrix of a time-series panel CSV.
    Corr(CorrArgs),
    /// Validate a matrix CSV as a correlation matrix.
    Check(CheckArgs),
    /// Repair a matrix CSV into a correlation matrix.
    Repair(RepairArgs),
    /// Distance between two matrix CSVs.
    Compare(CompareArgs),
    /// Randomized clip-vs-apd comparison.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Clip,
    Apd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Fail,
    Drop,
    Pairwise,
}

impl From<PolicyArg> for MissingPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Fail => MissingPolicy::Fail,
            PolicyArg::Drop => MissingPolicy::DropIncompleteDates,
            PolicyArg::Pairwise => MissingPolicy::PairwiseComplete,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the matrix here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Digits after the decimal point, 1..=17.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub precision: u8,
    /// Add a label header row and column when labels are known.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct CorrArgs {
    pub panel: PathBuf,
    #[arg(long, value_enum, default_value_t = PolicyArg::Fail)]
    pub policy: PolicyArg,
    /// Restrict one pair's window: "A,B,start:end" (1-based, inclusive). Repeatable.
    #[arg(long = "override", value_parser = parse_override)]
    pub overrides: Vec<PairOverride>,
    #[command(flatten)]
    pub out: OutputArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    pub matrix: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPSILON, value_parser = parse_positive)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Clip)]
    pub method: MethodArg,
    #[command(flatten)]
    pub out: OutputArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 10)]
    pub size: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON, value_parser = parse_positive)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

/// `"A,B,start:end"` with 1-based inclusive indices. Labels may contain
/// spaces and slashes but not commas.
pub fn parse_override(s: &str) -> Result<PairOverride, String> {
    let (pair, range) = s.rsplit_once(',').ok_or("expected \"A,B,start:end\"")?;
    let (a, b) = pair.split_once(',').ok_or("expected \"A,B,start:end\"")?;
    let (start, end) = range.split_once(':').ok_or("range must be start:end")?;
    let index = |v: &str| -> Result<usize, String> {
        match v.trim().parse::<usize>() {
            Ok(0) => Err("date indices are 1-based".into()),
            Ok(i) => Ok(i - 1),
            Err(e) => Err(format!("bad date index '{v}': {e}")),
        }
    };
    Ok(PairOverride::new(a.trim(), b.trim(), index(start)?, index(end)?))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Corr(a) => cmd_corr(&a, out, err),
        Command::Check(a) => cmd_check(&a, out),
        Command::Repair(a) => cmd_repair(&a, out, err),
        Command::Compare(a) => cmd_compare(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let code = match &e {
            FormatError::Core(c) => core_exit_code(c),
            _ => EXIT_ERROR,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<corrfix_core::Error> for Failure {
    fn from(e: corrfix_core::Error) -> Self {
        Failure {
            code: core_exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_ERROR,
            message: e.to_string(),
        }
    }
}

fn core_exit_code(e: &corrfix_core::Error) -> i32 {
    match e {
        corrfix_core::Error::EigenNotConverged { .. } | corrfix_core::Error::ApdNotConverged { .. } => EXIT_NUMERICAL,
        _ => EXIT_ERROR,
    }
}

type CmdResult = Result<i32, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    io::read_to_string(path).map_err(|e| Failure {
        code: EXIT_ERROR,
        message: format!("{}: {e}", path.display()),
    })
}

/// Matrix to `--output` (report to `out`) or to `out` (report to `err`).
fn emit(
    matrix: &SymmetricMatrix,
    labels: Option<&[String]>,
    opts: &OutputArgs,
    report: &str,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    let labels = if opts.header { labels } else { None };
    let csv = io::write_matrix(matrix, opts.precision as usize, labels)?;
    match &opts.output {
        Some(path) => {
            io::write_atomic(path, &csv)?;
            out.write_all(report.as_bytes())?;
        }
        None => {
            out.write_all(csv.as_bytes())?;
            err.write_all(report.as_bytes())?;
        }
    }
    Ok(())
}

pub fn cmd_corr(args: &CorrArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let panel = io::parse_panel(&read(&args.panel)?)?;
    let matrix = sample_correlation(&panel, args.policy.into(), &args.overrides)?;
    let check = check_correlation(&matrix, CheckTolerances::default())?;
    let report = Report::new()
        .field("dimension", matrix.dim())
        .num("min_eigenvalue", check.min_eigenvalue)
        .field("is_psd", check.is_psd)
        .render(args.format == Format::Json);
    emit(&matrix, Some(panel.instruments()), &args.out, &report, out, err)?;
    Ok(if check.is_psd { EXIT_OK } else { EXIT_NOT_CORRELATION })
}

pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> CmdResult {
    let file = io::read_grid(&read(&args.matrix)?)?;
    let report = check_correlation_grid(&file.grid, CheckTolerances::default())?;
    out.write_all(check_report(&report).render(args.format == Format::Json).as_bytes())?;
    Ok(if report.is_correlation {
        EXIT_OK
    } else {
        EXIT_NOT_CORRELATION
    })
}

pub fn cmd_repair(args: &RepairArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let file = io::read_grid(&read(&args.matrix)?)?;
    let labels = file.labels.clone();
    let input = file.into_symmetric()?;
    let result: RepairResult = match args.method {
        MethodArg::Clip => shrink_repair(&input, args.epsilon)?,
        MethodArg::Apd => apd_nearest(&input, ApdOptions::default())?,
    };
    let report = repair_report(&result).render(args.format == Format::Json);
    emit(
        result.repaired.as_symmetric(),
        labels.as_deref(),
        &args.out,
        &report,
        out,
        err,
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> CmdResult {
    let a = io::read_matrix(&read(&args.a)?)?;
    let b = io::read_matrix(&read(&args.b)?)?;
    let norms = diff_norms(&a, &b)?;
    out.write_all(norm_report(&norms).render(args.format == Format::Json).as_bytes())?;
    Ok(EXIT_OK)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> CmdResult {
    let config = BenchConfig {
        size: args.size,
        trials: args.trials,
        seed: args.seed,
        noise: args.noise,
        epsilon: args.epsilon,
    };
    let summary = run_bench(config).map_err(|e| Failure {
        code: e.exit_code(),
        message: e.to_string(),
    })?;
    let report = bench_report(&summary);
    match args.format {
        Format::Json => out.write_all(report.render(true).as_bytes())?,
        Format::Text => {
            out.write_all(bench_table(&summary).as_bytes())?;
            out.write_all(b"\n")?;
            out.write_all(report.to_text().as_bytes())?;
        }
    }
    Ok(EXIT_OK)
}
