//! `phasescreen` command-line tool.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::CampaignConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "phasescreen", version, about = "Generate, validate and time turbulent phase screens")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write screens to a binary file.
    Generate(Common),
    /// Compare the sample structure function with its reference (CSV).
    Validate(Common),
    /// Time screen generation over a matrix of methods and sizes (CSV).
    Bench(Common),
    /// Print the reference structure function (CSV).
    Target(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` campaign file; every key has a default.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (required by `generate`; stdout otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

fn load(common: &Common) -> Result<CampaignConfig, CliError> {
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = CampaignConfig::from_text(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set thread count: {e}")))?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(c) => commands::generate(&load(&c)?, c.out.as_deref()),
        Command::Validate(c) => {
            let cfg = load(&c)?;
            let (csv, sigma) = commands::validate(&cfg)?;
            commands::write_report(c.out.as_deref(), &csv)?;
            eprintln!("sigma = {sigma:.5} over {} separations, {} real screens", cfg.offsets.len(), 2 * cfg.n_samples);
            Ok(())
        }
        Command::Bench(c) => commands::write_report(c.out.as_deref(), &commands::bench(&load(&c)?)?),
        Command::Target(c) => commands::write_report(c.out.as_deref(), &commands::target(&load(&c)?)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phasescreen: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
