//! Command-line front end.
//!
//! Every command reads a JSON config (`--config`), writes its results into
//! `--out` and exits with one of the codes below. Failures are reported on
//! stderr as one JSON object per line.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | I/O failure while writing outputs |
//! | 2 | invalid config, flag or sweep field |
//! | 3 | unstable system (`rho >= 1`) |
//! | 4 | stationary truncation failed |
//! | 5 | no core count up to `C_max` meets the target |
//!
//! Plottable series are always written as CSV. With `--format json` (the
//! default) a JSON summary is written next to them.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "CRANDIM_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;
pub const EXIT_TRUNCATION: i32 = 4;
pub const EXIT_NOT_FOUND: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "crandim",
    version,
    about = "Dimensioning toolkit for pooled baseband processing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for simulation runs; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Independent simulation replications; overrides the config.
    #[arg(long, global = true)]
    pub replications: Option<u32>,

    /// Format of the summary file.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Exceedance backend for `dimension` and `sweep`; overrides the config.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendFlag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Stationary distribution and batch sojourn tail of the batch queue.
    Analyze,
    /// Discrete-event simulation of a Poisson or radio workload.
    Simulate,
    /// Smallest core count meeting a latency target.
    Dimension,
    /// Fronthaul rates for CPRI and the intra-PHY split.
    Fronthaul,
    /// Exceedance at a deadline while one parameter varies.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Simulate => "simulate",
            Command::Dimension => "dimension",
            Command::Fronthaul => "fronthaul",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendFlag {
    Analytic,
    Sim,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INVALID,
            kind: "validation",
            message: message.into(),
            line: None,
            column: None,
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            kind: "io",
            message: message.into(),
            line: None,
            column: None,
        }
    }

    fn json(path: &Path, e: &serde_json::Error) -> Self {
        let kind = if e.is_syntax() || e.is_eof() {
            "malformed_json"
        } else {
            "validation"
        };
        CliError {
            code: EXIT_INVALID,
            kind,
            message: format!("{}: {e}", path.display()),
            line: Some(e.line()),
            column: Some(e.column()),
        }
    }

    /// One JSON object, as written to stderr.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&Diagnostic {
            level: "error",
            error: self,
        })
        .expect("diagnostic serializes")
    }
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    level: &'static str,
    #[serde(flatten)]
    error: &'a CliError,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match e {
            Error::InvalidParameter(_) | Error::NotGeometric => (EXIT_INVALID, "validation"),
            Error::Unstable { .. } => (EXIT_UNSTABLE, "unstable"),
            Error::Truncation { .. } => (EXIT_TRUNCATION, "truncation"),
            Error::NotFound { .. } => (EXIT_NOT_FOUND, "c_max_insufficient"),
        };
        CliError {
            code,
            kind,
            message: e.to_string(),
            line: None,
            column: None,
        }
    }
}

/// Successful run: files written and text for stdout.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub stdout: String,
}

/// Parse `args`, run the command, print diagnostics and return the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            e.code
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

/// Run a parsed command line.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    configure_workers()?;
    match cli.command {
        Command::Analyze => commands::analyze(cli),
        Command::Simulate => commands::simulate(cli),
        Command::Dimension => commands::dimension(cli),
        Command::Fronthaul => commands::fronthaul(cli),
        Command::Sweep => commands::sweep(cli),
    }
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::invalid(format!(
            "{WORKERS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    // The global pool can only be set once per process; later calls keep it.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}
