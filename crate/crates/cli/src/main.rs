// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! `sim`: command-line front end for the Rydberg-EIT nonlinearity
//! toolkit. Exit codes: 0 success, 2 configuration or input error,
//! 3 numerical failure.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or malformed input (exit 2).
    Config(String),
    /// Solver, quadrature or fit failure (exit 3).
    Numerical(String),
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<rydeit_core::Error> for CliError {
    fn from(e: rydeit_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "sim",
    version,
    about = "Rydberg-EIT cooperative nonlinearity simulator",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probe-detuning spectra for the selected model.
    Spectrum(RunArgs),
    /// On-resonance susceptibility versus probe power and density.
    Nonlinearity(RunArgs),
    /// Ion Stark-shift Monte Carlo spectra and peak shifts.
    Ionmc(RunArgs),
    /// Fit ground-state density to a coupling-off transmission CSV.
    Fit(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (TOML, JSON, or a sidecar from an earlier run).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Shipped preset: fig2, fig3a, fig4 or fig5.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides the config).
    #[arg(long, env = "SIM_OUT")]
    out: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker-thread cap for parallel sweeps.
    #[arg(long, env = "SIM_JOBS")]
    jobs: Option<usize>,
}

fn run(command: &Command) -> Result<(), CliError> {
    let (args, name) = match command {
        Command::Spectrum(args) => (args, "spectrum"),
        Command::Nonlinearity(args) => (args, "nonlinearity"),
        Command::Ionmc(args) => (args, "ionmc"),
        Command::Fit(args) => (args, "fit"),
    };
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(CliError::config("--jobs must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    let raw = config::load(args.config.as_deref(), args.preset.as_deref())?;
    let resolved = config::resolve(raw, args.seed, args.out.clone())?;
    match name {
        "spectrum" => commands::cmd_spectrum(&resolved),
        "nonlinearity" => commands::cmd_nonlinearity(&resolved),
        "ionmc" => commands::cmd_ionmc(&resolved),
        "fit" => commands::cmd_fit(&resolved),
        _ => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
