//! `dynamo`: config-driven runner for the alpha-effect pipeline. Subcommands
//! assemble the alpha matrix, sweep the Bloch rates, build the intermittent
//! schedule, run the end-to-end simulation, or verify every module's
//! invariant suite.

mod commands;
mod config;
mod verify;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dynamo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct JobArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the alpha matrix and compare it with the closed form.
    Alpha(JobArgs),
    /// Sweep the leading Bloch eigenvalue over the configured offsets.
    Bloch(JobArgs),
    /// Build the intermittent schedule from a measured or given growth rate.
    Schedule(JobArgs),
    /// Run the scheduled simulation from the mean initial datum.
    Simulate(JobArgs),
    /// Run every module's invariant suite; nonzero exit on any failure.
    Verify(VerifyArgs),
}

fn load(args: &JobArgs) -> anyhow::Result<RunConfig> {
    let mut config = config::parse_config(&args.config)?;
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    let summary = match &cli.command {
        Command::Alpha(args) => commands::cmd_alpha(load(args)?)?,
        Command::Bloch(args) => commands::cmd_bloch(load(args)?)?,
        Command::Schedule(args) => commands::cmd_schedule(load(args)?)?,
        Command::Simulate(args) => commands::cmd_simulate(load(args)?)?,
        Command::Verify(args) => {
            let mut config = match &args.config {
                Some(path) => config::parse_config(path)?,
                None => RunConfig::default(),
            };
            if let Some(out) = &args.out {
                config.out_dir = out.clone();
            }
            verify::cmd_verify(config, args.seed)?
        }
    };
    if !summary.pass {
        for check in summary.checks.iter().filter(|c| !c.report.pass) {
            eprintln!(
                "failed: {} (expected {:.6e}, measured {:.6e}, tolerance {:.1e})",
                check.name, check.report.expected, check.report.measured, check.report.tolerance
            );
        }
    }
    Ok(summary.pass)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
