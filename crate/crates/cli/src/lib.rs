//! Command-line front end for the `slcf` estimation library.
//!
//! Three subcommands share one JSON config file:
//!
//! * `estimate` fits SLCF to a long-format panel CSV,
//! * `simulate` runs a Monte Carlo study over a grid of first-stage nonlinearity,
//! * `compare` runs several estimators side by side on one dataset.
//!
//! Exit codes: 0 success, 2 usage or config error, 3 data or output error,
//! 4 numeric failure. Output layouts are described in `docs/formats.md`.

pub mod compare;
pub mod config;
pub mod error;
pub mod estimate;
pub mod format;
pub mod simulate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slcf::panel::TransformKind;

use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "slcf",
    version,
    about = "Super learner control function estimation for panel data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit SLCF to the panel named in the config's `data` section.
    Estimate(CommonArgs),
    /// Run a Monte Carlo study on the config's `dgp` section.
    Simulate(CommonArgs),
    /// Run several estimators on one dataset and flag non-equivalent pairs.
    Compare(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the SLCF seed and, if present, the simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `slcf-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sample splits and replications.
    #[arg(long)]
    threads: Option<usize>,
    /// Transform for SLCF; in `simulate` and `compare` it also drops learned
    /// estimators that use the other transform.
    #[arg(long, value_enum)]
    transform: Option<TransformArg>,
    /// Suppress the terminal summary.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TransformArg {
    #[value(alias = "first_difference", alias = "first-difference")]
    Fd,
    Within,
}

impl From<TransformArg> for TransformKind {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::Fd => TransformKind::FirstDifference,
            TransformArg::Within => TransformKind::Within,
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("slcf: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    let (kind, args) = match command {
        Command::Estimate(a) => ("estimate", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Compare(a) => ("compare", a),
    };
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let transform = args.transform.map(TransformKind::from);
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply(&Overrides {
        seed: args.seed,
        out: args.out.clone(),
        transform,
    });

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;

    let text = pool.install(|| -> CliResult<String> {
        Ok(match kind {
            "estimate" => estimate::summary(&estimate::run(&cfg)?.0),
            "simulate" => simulate::summary(&simulate::run(&cfg, transform)?.report),
            _ => compare::summary(&compare::run(&cfg, transform)?.0),
        })
    })?;
    if !args.quiet {
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(text.as_bytes());
        let _ = writeln!(out, "\nresults written to {}", cfg.out_dir().display());
    }
    Ok(())
}
