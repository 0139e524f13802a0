mod analyze;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] supercool_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type CliResult<T> = Result<T, CliError>;

/// Exit status of a command that did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Output was written, but some solver steps did not converge.
    ConvergenceWarning,
}

#[derive(Debug, Parser)]
#[command(name = "supercool", version, about = "Solver and free-boundary analysis for the supercooled Stefan problem")]
struct Cli {
    /// Run configuration file (sections [grid] [solver] [analysis] [example]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed recorded in every sidecar.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override a config entry, e.g. `--set analysis.gamma=5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a reference field: planar, tychonoff, radial or glued.
    Example {
        name: String,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        amp: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Evolve initial data with the implicit obstacle solver.
    Solve {
        /// Initial data as an expression in x, y and r (e.g. "0.1*(1-r^2)^2").
        #[arg(long, conflicts_with = "w0")]
        expr: Option<String>,
        /// Initial data file: one value per node, row-major, separated by
        /// whitespace or commas.
        #[arg(long)]
        w0: Option<PathBuf>,
        /// Run even if the initial data fail validation.
        #[arg(long)]
        force: bool,
        /// Output file stem.
        #[arg(long, default_value = "solve")]
        name: String,
    },
    /// Run one analysis on a field file: freeze, frequency, blowup, classify,
    /// taylor, cleaning, dimension, nucleation or jumps.
    Analyze {
        kind: String,
        field: PathBuf,
        /// `auto-extinction` or comma-separated coordinates `x1[,x2],t`.
        #[arg(long)]
        center: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Classify every detected extinction maximum.
        #[arg(long)]
        all_extinction_maxima: bool,
    },
    /// One-page text summary of a field file.
    Report { field: PathBuf },
}

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    for o in &cli.overrides {
        cfg.apply_override(o)?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<Outcome> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let mut cfg = load_config(&cli)?;
    std::fs::create_dir_all(&cli.out).map_err(|source| CliError::Io { path: cli.out.clone(), source })?;
    match cli.command {
        Command::Example { name, t0, d, amp, eps, order, spacing, n_max } => {
            let ex = &mut cfg.example;
            ex.t0 = t0.unwrap_or(ex.t0);
            ex.d = d.unwrap_or(ex.d);
            ex.amp = amp.unwrap_or(ex.amp);
            ex.eps = eps.unwrap_or(ex.eps);
            ex.order = order.unwrap_or(ex.order);
            ex.spacing = spacing.unwrap_or(ex.spacing);
            ex.n_max = n_max.unwrap_or(ex.n_max);
            let ctx = Context { cfg, out: cli.out, seed: cli.seed };
            commands::example(&ctx, &name)
        }
        Command::Solve { expr, w0, force, name } => {
            let ctx = Context { cfg, out: cli.out, seed: cli.seed };
            commands::solve(&ctx, expr.as_deref(), w0.as_deref(), force, &name)
        }
        Command::Analyze { kind, field, center, gamma, all_extinction_maxima } => {
            if let Some(g) = gamma {
                cfg.analysis.gamma = g;
            }
            let ctx = Context { cfg, out: cli.out, seed: cli.seed };
            analyze::analyze(&ctx, &kind, &field, center.as_deref(), all_extinction_maxima)
        }
        Command::Report { field } => {
            let ctx = Context { cfg, out: cli.out, seed: cli.seed };
            commands::report(&ctx, &field)
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are hard errors; exit code 2 is reserved for
            // convergence warnings
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ConvergenceWarning) => {
            eprintln!("warning: some solver steps did not converge (see the sidecar report)");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
