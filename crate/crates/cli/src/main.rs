//! Command-line driver: runs the built-in cases, radius sweeps, generators and the
//! manufactured-solution check.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 solver or check failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Failure;
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "emdim", version, about = "Coupled 3D-1D electrostatics solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed of the random tree generator (overrides graph.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Assemble and solve one case, write summary, tables and fields.
    Run,
    /// Solve the straight-line case for each radius on one mesh and fit the error slope.
    Sweep,
    /// Write the mesh and graph of a case to plain-text files.
    Gen,
    /// Check the manufactured data against the exact fields.
    Verify {
        /// Check the data as originally published instead of the derived ones.
        #[arg(long)]
        published: bool,
    },
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("--config PATH is required"))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.graph.seed = Some(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = Some(out.clone());
    }
    cfg.resolve()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Run => commands::run(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Gen => commands::gen(&cfg),
        Command::Verify { published } => commands::verify(&cfg, published),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver error: {e:#}");
            ExitCode::from(2)
        }
    }
}
