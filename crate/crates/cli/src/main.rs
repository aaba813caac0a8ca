//! `msqg-wn`: kernels, white noise, quadratic forms, dynamics and verification runs from the
//! command line. Every run writes its outputs atomically together with the resolved
//! configuration.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{dynamics::DynCommand, kernel::KernelCommand, noise::NoiseCommand};
use commands::{quadform::QuadformCommand, verify::VerifyCommand};

#[derive(Parser, Debug)]
#[command(name = "msqg-wn", version, about)]
struct Cli {
    /// Worker threads for ensemble work; 0 uses every core
    #[arg(long, global = true, env = "MSQG_WN_JOBS", default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plane and periodic kernels
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// White-noise fields
    #[command(subcommand)]
    Noise(NoiseCommand),
    /// Quadratic forms of white noise
    #[command(subcommand)]
    Quadform(QuadformCommand),
    /// Vortex and Galerkin dynamics
    #[command(subcommand, name = "dyn")]
    Dyn(DynCommand),
    /// Statistical and deterministic checks, exit code 1 on failure
    #[command(subcommand)]
    Verify(VerifyCommand),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
    {
        eprintln!("error: cannot start {} worker threads: {e}", cli.jobs);
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Kernel(c) => commands::kernel::run(c),
        Command::Noise(c) => commands::noise::run(c),
        Command::Quadform(c) => commands::quadform::run(c),
        Command::Dyn(c) => commands::dynamics::run(c),
        Command::Verify(c) => commands::verify::run(c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
