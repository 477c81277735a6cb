//! Experiment driver for the linear-payment auction library.
//!
//! Exit codes: 0 all-pass, 1 proposition failure, 2 config error,
//! 3 numerical failure.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use config::Experiment;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum ExitKind {
    Proposition(String),
    Config(String),
    Numerical(String),
}

impl ExitKind {
    fn code(&self) -> u8 {
        match self {
            ExitKind::Proposition(_) => 1,
            ExitKind::Config(_) => 2,
            ExitKind::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            ExitKind::Proposition(m) | ExitKind::Config(m) | ExitKind::Numerical(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "collab-auction",
    about = "Optimal linear-payment auctions with aftermarket collaboration: \
             share curves, proposition verdicts, and ascending-auction simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    /// Path to the TOML experiment config.
    config: PathBuf,
    /// Override the config's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the θ-grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// Override the Monte Carlo draw count.
    #[arg(long)]
    draws: Option<usize>,
    /// Override the quadrature relative tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal value-sharing curves (winner- vs seller-pivotal) as CSV.
    AlphaCurve(Common),
    /// Run every proposition check and print a verdict table.
    Verify(Common),
    /// Seeded ascending-auction runs with a direct-mechanism comparison.
    Simulate(Common),
    /// Sweep the interdependence weight and report the revenue argmax.
    ZetaSweep(Common),
    /// Misreport audits of the direct mechanism.
    IcAudit(Common),
}

fn load(common: &Common) -> Result<Experiment, ExitKind> {
    let mut exp =
        Experiment::load(&common.config).map_err(|e| ExitKind::Config(e.to_string()))?;
    if let Some(dir) = &common.out_dir {
        exp.config.output_dir = dir.clone();
    }
    if let Some(seed) = common.seed {
        exp.config.seed = seed;
    }
    if let Some(grid) = common.grid {
        exp.config.theta_grid = grid;
    }
    if let Some(draws) = common.draws {
        exp.config.n_draws = draws;
    }
    if let Some(rel_tol) = common.rel_tol {
        exp.config.quad.rel_tol = rel_tol;
    }
    Ok(exp)
}

fn run() -> Result<(), ExitKind> {
    let cli = Cli::parse();
    match &cli.command {
        Command::AlphaCurve(c) => commands::cmd_alpha_curve(&load(c)?),
        Command::Verify(c) => commands::cmd_verify(&load(c)?),
        Command::Simulate(c) => commands::cmd_simulate(&load(c)?),
        Command::ZetaSweep(c) => commands::cmd_zeta_sweep(&load(c)?),
        Command::IcAudit(c) => commands::cmd_ic_audit(&load(c)?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(kind) => {
            eprintln!("error: {}", kind.message());
            ExitCode::from(kind.code())
        }
    }
}
