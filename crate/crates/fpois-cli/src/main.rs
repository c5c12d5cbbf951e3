//! Batch front end: parse a structure definition, run one verification
//! pipeline, emit an exact machine-readable report.
//!
//! Exit codes: 0 every check passed, 1 some check failed, 2 input error,
//! 3 internal assertion failure.

mod commands;
mod job;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use commands::CliError;
use std::panic;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(
    name = "fpois",
    about = "Exact verification of formal Poisson structures: gauge transforms, self-equivalence bimodules and the B-field classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the job specification (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Override the job's truncation order.
    #[arg(long, global = true)]
    order: Option<usize>,

    /// Override the job's random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Restrict the report to the named checks.
    #[arg(long = "check", global = true)]
    checks: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the Schouten self-bracket of pi and check that it vanishes.
    Jacobi,
    /// Apply the gauge transform by B and its inverse.
    Gauge,
    /// Construct and verify the self-equivalence bimodule of pi.
    SelfEquiv,
    /// Run the classifying-action pipeline for (B, pi).
    Classify,
    /// Produce the Morita certificate for pi and tau_{-B}(pi).
    Morita,
    /// Randomized homotopy-identity and chain-map suite.
    HomotopyCheck,
    /// Seeded invariant suites across all modules.
    Fuzz,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Jacobi => "jacobi",
            Command::Gauge => "gauge",
            Command::SelfEquiv => "self-equiv",
            Command::Classify => "classify",
            Command::Morita => "morita",
            Command::HomotopyCheck => "homotopy-check",
            Command::Fuzz => "fuzz",
        }
    }
}

fn run(cli: &Cli) -> Result<report::Report, CliError> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| CliError::Input("--input <path> is required".into()))?;
    let mut job = job::load_job(path).map_err(CliError::Input)?;
    if let Some(order) = cli.order {
        job.truncation_order = order;
        job.validate().map_err(CliError::Input)?;
    }
    if let Some(seed) = cli.seed {
        job.seed = Some(seed);
    }
    if let Some(declared) = &job.command {
        if declared != cli.command.name() {
            return Err(CliError::Input(format!(
                "job declares command `{declared}` but `{}` was invoked",
                cli.command.name()
            )));
        }
    }
    let mut report = match cli.command {
        Command::Jacobi => commands::cmd_jacobi(&job)?,
        Command::Gauge => commands::cmd_gauge(&job)?,
        Command::SelfEquiv => commands::cmd_self_equiv(&job)?,
        Command::Classify => commands::cmd_classify(&job)?,
        Command::Morita => commands::cmd_morita(&job)?,
        Command::HomotopyCheck => commands::cmd_homotopy_check(&job)?,
        Command::Fuzz => commands::cmd_fuzz(&job)?,
    };
    report.filter_checks(&cli.checks);
    Ok(report)
}

fn main() {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = panic::catch_unwind(panic::AssertUnwindSafe(|| run(&cli)));
    let code = match outcome {
        Ok(Ok(report)) => {
            let rendered = match cli.format {
                Format::Text => report.render_text(),
                Format::Structured => report.render_structured(),
            };
            print!("{rendered}");
            eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
            if report.pass {
                0
            } else {
                1
            }
        }
        Ok(Err(e)) => {
            eprintln!("{e}");
            match e {
                CliError::Input(_) => 2,
                CliError::Internal(_) => 3,
            }
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".to_string());
            eprintln!("internal assertion: {msg}");
            3
        }
    };
    std::process::exit(code);
}
