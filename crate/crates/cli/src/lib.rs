//! Batch front end: configuration, the `solve`, `sweep` and `validate`
//! pipelines, and their CSV artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::config::ConfigTable;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const USAGE_OR_IO: u8 = 1;
    pub const NOT_CONVERGED: u8 = 2;
    pub const CHECK_FAILED: u8 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "mfpa", version, about = "Mean-field power allocation for grant-free IoT uplinks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one equilibrium and write policy, mean field, costate and summary.
    Solve(CommonArgs),
    /// Solve once per value of `sweep_param` and write sweep.csv.
    Sweep(CommonArgs),
    /// Run the Monte Carlo oracle checks and write validate.csv.
    Validate(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Configuration file (TOML key = value); all keys optional.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; defaults to the `output` key.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set lambda_s=1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Worker threads for sweeps and Monte Carlo replications.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Random seed; overrides the `seed` key.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl CommonArgs {
    pub fn table(&self) -> Result<ConfigTable> {
        let mut t = match &self.config {
            Some(path) => ConfigTable::from_file(path)?,
            None => ConfigTable::default(),
        };
        for o in &self.overrides {
            t.set(o)?;
        }
        if let Some(seed) = self.seed {
            t.set(&format!("seed={seed}"))?;
        }
        Ok(t)
    }

    fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
            .max(1)
    }
}

/// Runs a parsed command and returns its exit code.
pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Solve(a) => {
            let cfg = a.table()?.resolve()?;
            let out = a.out.clone().unwrap_or_else(|| cfg.output.clone());
            let sol = commands::cmd_solve(&cfg, &out)?;
            Ok(if sol.summary.converged { exit::SUCCESS } else { exit::NOT_CONVERGED })
        }
        Command::Sweep(a) => {
            let table = a.table()?;
            let cfg = table.resolve()?;
            let out = a.out.clone().unwrap_or_else(|| cfg.output.clone());
            let rows = commands::cmd_sweep(&table, &out, a.workers())?;
            for r in &rows {
                if let Err(msg) = &r.outcome {
                    eprintln!("sweep point {}: {msg}", r.value);
                }
            }
            Ok(if rows.iter().all(|r| r.converged()) { exit::SUCCESS } else { exit::NOT_CONVERGED })
        }
        Command::Validate(a) => {
            let cfg = a.table()?.resolve()?;
            let out = a.out.clone().unwrap_or_else(|| cfg.output.clone());
            let pool = rayon::ThreadPoolBuilder::new().num_threads(a.workers()).build()?;
            let checks = pool.install(|| commands::cmd_validate(&cfg, &out))?;
            Ok(if checks.iter().all(|c| c.passed()) { exit::SUCCESS } else { exit::CHECK_FAILED })
        }
    }
}
