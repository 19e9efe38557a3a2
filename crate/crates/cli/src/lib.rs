//! Command-line front end: configure a domain and grid, run an analysis and
//! write `report.json`, `history.csv` and field exports.

pub mod commands;
pub mod config;
pub mod reproduce;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{execute, Outcome};
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },
    #[error("{0}")]
    Core(#[from] hardy_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for anything the user can fix in the config, 2 for a failed
    /// mathematical precondition.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(hardy_core::Error::Precondition(_)) => 2,
            _ => 1,
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_UNCONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hardy", version, about = "Hardy inequalities on mean convex domains")]
pub struct Cli {
    /// INI run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: `out` in the working directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Distance field, both `-Δδ` evaluations, singular set and convexity report.
    Analyze,
    /// Best Hardy constant estimate.
    Mu,
    /// Curvature lower bound, plus the Brezis–Marcus estimate in grid mode.
    Lambda,
    /// Remainder-constant table.
    Table,
    /// Distributional, identity, vector-inequality and growth checks.
    Verify,
    /// Pinned example runs compared against stored expectations.
    Reproduce {
        #[arg(value_parser = reproduce::IDS.to_vec())]
        id: String,
    },
}

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let threads = cli.threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_CONFIG;
        }
    };
    match pool.install(|| run_inner(&cli)) {
        Ok(o) => {
            // a closed stdout (e.g. piped into `head`) is not an error
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", o.summary);
            for f in &o.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            o.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(cli: &Cli) -> Result<Outcome, CliError> {
    let out = cli.out.clone();
    let config = match &cli.config {
        Some(path) => {
            let src = std::fs::read_to_string(path)?;
            let mut c = RunConfig::parse(&src)?;
            if let Some(s) = cli.seed {
                c.seed = s;
            }
            Some(c)
        }
        None => None,
    };
    let dir = out
        .or_else(|| config.as_ref().and_then(|c| c.out.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    execute(&cli.command, config.as_ref(), cli.seed, &dir)
}
