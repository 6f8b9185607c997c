//! `specflow` command line: spectral flow, eigenvalue traces, operator
//! distances and the invariant suite.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 method disagreement or a
//! failed invariant, 64 usage or input error.

mod commands;
mod verify;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use specflow_core::{Family, FamilyDescriptor, PathDescriptor, SpecFlowError};

pub use verify::Group;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NUMERICAL: u8 = 1;
pub const EXIT_DISAGREEMENT: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(#[from] SpecFlowError),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) | CliError::Output { .. } => EXIT_NUMERICAL,
        }
    }
}

/// Input errors raised while building a path count as usage errors.
pub(crate) fn input_error(e: SpecFlowError) -> CliError {
    match e {
        SpecFlowError::Descriptor(_) | SpecFlowError::InvalidInput(_) | SpecFlowError::NotHermitian { .. } => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Numerical(other),
    }
}

#[derive(Debug, Parser)]
#[command(name = "specflow", version, about = "Spectral flow of paths of Hermitian matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral flow of a path by one or all methods.
    Sfl(SflArgs),
    /// Eigenvalue traces along a path.
    Spectrum(SpectrumArgs),
    /// Gap, resolvent, Riesz and norm distances between two operators.
    Gap(GapArgs),
    /// Seeded invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Partition,
    Tracking,
    Crossing,
    Morse,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct PathArgs {
    /// Named family, e.g. twisted_fourier.
    #[arg(long, conflicts_with = "descriptor")]
    pub family: Option<String>,
    /// Family parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t1: Option<f64>,
    /// Path descriptor: a file (JSON, or spectrum CSV) or inline JSON.
    #[arg(long)]
    pub descriptor: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SflArgs {
    #[command(flatten)]
    pub path: PathArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    pub method: MethodArg,
    /// Initial grid size.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Relative zero-classification tolerance.
    #[arg(long)]
    pub eps0: Option<f64>,
    /// Relative kernel tolerance for crossings.
    #[arg(long)]
    pub kernel_tol: Option<f64>,
    /// Gap-distance budget between adjacent samples.
    #[arg(long)]
    pub continuity_budget: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long, env = "SPECFLOW_SEED")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub path: PathArgs,
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GapArgs {
    /// First operator as a matrix literal `{"dim": n, "entries": [[re, im], ...]}`, file or inline.
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    Hermiticity,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Run only this group; repeatable.
    #[arg(long, value_enum)]
    pub group: Vec<Group>,
    #[arg(long, env = "SPECFLOW_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Random cases per property.
    #[arg(long, default_value_t = 20)]
    pub cases: usize,
    /// Corrupt a fixture to check that the suite notices.
    #[arg(long, value_enum)]
    pub inject_fault: Option<Fault>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Result of a command: the report text and the exit code it implies.
#[derive(Debug)]
pub struct Report {
    pub body: String,
    pub code: u8,
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let report = match &cli.command {
        Command::Sfl(a) => commands::sfl(a)?,
        Command::Spectrum(a) => commands::spectrum(a)?,
        Command::Gap(a) => commands::gap(a)?,
        Command::Verify(a) => verify::run(a)?,
    };
    let out = match &cli.command {
        Command::Sfl(a) => a.output.out.as_ref(),
        Command::Spectrum(a) => a.out.as_ref(),
        Command::Gap(a) => a.output.out.as_ref(),
        Command::Verify(a) => a.output.out.as_ref(),
    };
    if let Some(path) = out {
        fs::write(path, &report.body).map_err(|source| CliError::Output { path: path.clone(), source })?;
        return Ok(Report { body: String::new(), code: report.code });
    }
    Ok(report)
}

/// Reads `arg` as a file if one exists at that path, otherwise as inline text.
pub(crate) fn file_or_inline(arg: &str) -> Result<String, CliError> {
    let path = std::path::Path::new(arg);
    if !arg.trim_start().starts_with('{') && path.exists() {
        return fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {arg}: {e}")));
    }
    Ok(arg.to_string())
}

pub(crate) fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    raw.iter()
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("parameter '{kv}' is not KEY=VALUE")))?;
            let v: f64 = v.trim().parse().map_err(|_| CliError::Usage(format!("parameter '{kv}' has a non-numeric value")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

pub(crate) fn path_descriptor(args: &PathArgs) -> Result<PathDescriptor, CliError> {
    match (&args.family, &args.descriptor) {
        (Some(name), None) => {
            let family: Family = name.parse().map_err(input_error)?;
            let desc = FamilyDescriptor { family, params: parse_params(&args.params)? };
            Ok(PathDescriptor::family(desc, args.t0, args.t1))
        }
        (None, Some(d)) => {
            if !args.params.is_empty() || args.t0.is_some() || args.t1.is_some() {
                return Err(CliError::Usage("--param/--t0/--t1 go with --family, not --descriptor".into()));
            }
            let text = file_or_inline(d)?;
            if text.trim_start().starts_with("t,") {
                specflow_core::descriptor::spectrum_csv_to_descriptor(&text).map_err(input_error)
            } else {
                PathDescriptor::from_json(&text).map_err(input_error)
            }
        }
        _ => Err(CliError::Usage("give exactly one of --family or --descriptor".into())),
    }
}
