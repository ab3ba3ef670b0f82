//! `bellrand`: simulate, analyze and extract randomness from photon-pair CHSH data.

mod commands;
mod params;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

pub const EXIT_ERROR: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_ABORT: u8 = 3;

/// Ways a run can end without success.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or config; exit 2.
    Usage(String),
    /// The protocol aborted (or found no violation to certify); exit 3.
    Abort(String),
    /// Anything else; exit 1.
    Error(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Error(e)
    }
}

impl From<bellrand_core::Error> for Failure {
    fn from(e: bellrand_core::Error) -> Self {
        Failure::Error(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Error(e.into())
    }
}

#[derive(Parser)]
#[command(name = "bellrand", version, about = "Device-independent randomness from photon-pair CHSH experiments")]
struct Cli {
    /// Worker threads (0: one per core). Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

/// Flags every subcommand shares.
#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    /// `key=value` config file; a previous run's manifest also works.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Where to write the run manifest (default: `<out>.manifest`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo event stream and settings schedule.
    Simulate(commands::SimulateCmd),
    /// CHSH estimate against bin width.
    ScanTau(commands::ScanCmd),
    /// Maximize the model CHSH value over state and analyzer angles.
    Optimize(commands::OptimizeCmd),
    /// Asymptotic and finite-size randomness rates.
    Rates(commands::RatesCmd),
    /// Run the spot-checking protocol.
    #[command(subcommand)]
    Protocol(ProtocolCmd),
    /// Trevisan extraction of a bit file with a seed file.
    Extract(commands::ExtractCmd),
    /// Frequency, block-frequency, runs and cusum tests on a bit file.
    Stattests(commands::StattestsCmd),
}

#[derive(Subcommand)]
enum ProtocolCmd {
    /// Play rounds against a simulated device.
    Device(commands::DeviceCmd),
    /// Simulate, calibrate the bin width, run all-test rounds, extract, test.
    Pipeline(commands::PipelineCmd),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} workers: {e}", cli.workers);
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Simulate(c) => c.run(),
        Command::ScanTau(c) => c.run(),
        Command::Optimize(c) => c.run(),
        Command::Rates(c) => c.run(),
        Command::Protocol(ProtocolCmd::Device(c)) => c.run(),
        Command::Protocol(ProtocolCmd::Pipeline(c)) => c.run(),
        Command::Extract(c) => c.run(),
        Command::Stattests(c) => c.run(),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Abort(msg)) => {
            eprintln!("aborted: {msg}");
            ExitCode::from(EXIT_ABORT)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
