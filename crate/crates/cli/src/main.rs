#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, Overrides, RunConfig, CONFIG_KEYS};

#[derive(Debug, Parser)]
#[command(name = "fracbvp", version, about = "Sequential psi-Caputo boundary value problems", after_help = CONFIG_KEYS)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for power-iteration starts
    #[arg(long, global = true, default_value_t = fracbvp::spectral::DEFAULT_SEED)]
    seed: u64,

    /// Output file for CSV results (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Solve the problem by Picard iteration and write the solution as `t,x` CSV
    #[command(after_help = CONFIG_KEYS)]
    Solve,
    /// Closed-form and oracle maximum of |G|
    #[command(after_help = CONFIG_KEYS)]
    Greenmax,
    /// Lyapunov-type inequality report
    #[command(after_help = CONFIG_KEYS)]
    Lyapunov,
    /// Eigenvalue lower bound from the Nystrom spectral radius
    #[command(after_help = CONFIG_KEYS)]
    Eig,
    /// Contraction and existence certificates
    #[command(after_help = CONFIG_KEYS)]
    Certify,
    /// Beta-identity residuals of the weighted quadrature
    #[command(after_help = CONFIG_KEYS)]
    Quadcheck,
    /// Eigenvalue bound over a grid of orders and charts, as CSV
    #[command(after_help = CONFIG_KEYS)]
    Sweep,
}

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Lib(#[from] fracbvp::Error),
    #[error("{0}")]
    NotConverged(String),
}

impl Failure {
    fn code(&self) -> u8 {
        use fracbvp::Error as E;
        match self {
            Failure::Config(_) => 1,
            Failure::Lib(E::Assumption(_) | E::NonIntegrable(_)) => 2,
            Failure::Lib(E::Numeric(_)) | Failure::NotConverged(_) => 3,
            Failure::Lib(_) => 1,
        }
    }
}

pub struct Context {
    pub cfg: RunConfig,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.apply(&cli.overrides);
    let ctx = Context { cfg, seed: cli.seed, out: cli.out };
    match cli.command {
        Command::Solve => commands::solve(&ctx),
        Command::Greenmax => commands::greenmax(&ctx),
        Command::Lyapunov => commands::lyapunov(&ctx),
        Command::Eig => commands::eig(&ctx),
        Command::Certify => commands::certify(&ctx),
        Command::Quadcheck => commands::quadcheck(&ctx),
        Command::Sweep => commands::sweep(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let mut lines = text.lines();
            let first = lines.next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("ERROR 1: {first}");
            for line in lines {
                eprintln!("{line}");
            }
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.code();
            eprintln!("ERROR {code}: {e}");
            ExitCode::from(code)
        }
    }
}
