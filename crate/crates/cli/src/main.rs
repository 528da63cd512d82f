//! `levykac` command-line driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::Ctx;
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "levykac", version, about = "Ground-state and semigroup diagnostics for Lévy Schrödinger operators")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed` in the configuration).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "LEVYKAC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the constants of the standing assumptions (exit 0 pass, 2 fail, 3 inconclusive).
    Check,
    /// Solve for the low spectrum (CSV + binary).
    Solve,
    /// Ground-state envelope, domination and subaveraging checks.
    Verify {
        /// Directory holding the `solve` outputs (defaults to the output directory).
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// GSD / IUC classification (exit 0 GSD, 4 AGSD-only, 5 not-AGSD, 3 inconclusive).
    Classify {
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Monte Carlo estimates.
    Mc,
    /// Consolidate a run directory into one JSON file and plot-ready tables.
    Report {
        /// Run directory (defaults to the output directory).
        run_dir: Option<PathBuf>,
    },
}

fn context(cli: &Cli) -> Result<Ctx> {
    let path = cli.config.as_ref().context("--config is required for this subcommand")?;
    let mut cfg = RunConfig::load(path)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    cfg.seed = seed;
    let out = cli.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("levykac-run"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let hash = cfg.hash();
    std::fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    Ok(Ctx { cfg, hash, out, seed, threads: cli.threads })
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        // Fails only if a global pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match &cli.command {
        Command::Report { run_dir } => {
            let dir = run_dir.clone().or_else(|| cli.out.clone()).context("report needs a run directory")?;
            commands::report(&dir)
        }
        Command::Check => commands::check(&context(&cli)?),
        Command::Solve => commands::solve(&context(&cli)?),
        Command::Verify { spectrum } => {
            let ctx = context(&cli)?;
            let dir = spectrum.clone().unwrap_or_else(|| ctx.out.clone());
            commands::verify(&ctx, &dir)
        }
        Command::Classify { spectrum } => {
            let ctx = context(&cli)?;
            let dir = spectrum.clone().unwrap_or_else(|| ctx.out.clone());
            commands::classify(&ctx, &dir)
        }
        Command::Mc => commands::mc(&context(&cli)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
