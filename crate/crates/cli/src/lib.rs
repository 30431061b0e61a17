//! Command-line driver: configuration, run orchestration and file I/O.

pub mod commands;
pub mod config;
pub mod output;
pub mod snapshot;

use clap::{Parser, Subcommand};
use config::{RunConfig, OUT_DIR_ENV};
use std::ffi::OsString;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("property failure: {0}")]
    Property(String),
    #[error("runtime abort: {0}")]
    Runtime(String),
    #[error("I/O error: {0}")]
    Io(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Format(_) => EXIT_CONFIG,
            CliError::Property(_) => EXIT_PROPERTY,
            CliError::Runtime(_) | CliError::Io(_) => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "csh", version, about = "Chern-Simons-Higgs simulation in Coulomb gauge on a periodic square")]
pub struct Cli {
    /// Flat `key = value` config file, or a run_manifest.json to replay.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the config and CSH_OUT_DIR.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Only report errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the configured initial data; writes diagnostics.csv, snapshots
    /// and run_manifest.json.
    Simulate,
    /// Run the property suite and the estimate catalogue.
    Verify,
    /// S^γ and S^{γ−1} norms of (φ, u) along a stored trajectory.
    Norms {
        /// Directory of snapshots; defaults to `norms.trajectory`, then
        /// `<out>/snapshots`.
        #[arg(long, value_name = "DIR")]
        trajectory: Option<PathBuf>,
        /// Defaults to `norms.gamma`.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// dt-halving ladder and grid-doubling pair with fitted orders.
    Convergence,
    /// Print the documented config schema with its defaults.
    Template,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::defaults(),
    };
    let env_out = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    Ok(cfg.with_overrides(cli.seed, cli.out.clone(), env_out))
}

/// Runs one command; returns `Ok(false)` on a property failure.
pub fn execute(cli: &Cli) -> Result<bool, CliError> {
    if let Command::Template = cli.command {
        print!("{}", RunConfig::template());
        return Ok(true);
    }
    let cfg = load(cli)?;
    match &cli.command {
        Command::Simulate => commands::simulate::run(&cfg),
        Command::Verify => commands::verify::run(&cfg),
        Command::Norms { trajectory, gamma } => commands::norms::run(&cfg, trajectory.as_deref(), *gamma),
        Command::Convergence => commands::convergence::run(&cfg),
        Command::Template => unreachable!(),
    }
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let level = if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Info };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    log::set_max_level(level);
    match execute(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_PROPERTY,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}
