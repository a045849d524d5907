//! `msl`: solutions, Stokes multipliers and spectral data of a matrix
//! Sturm-Liouville problem described by a TOML file.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use msl_core::{Error, ErrorKind};
use serde::Serialize;

use config::Config;
use output::Sink;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Fundamental solutions on a grid.
    Fss,
    /// Stokes multipliers along rays and their decay fits.
    Stokes,
    /// Eigenvalue table and the eigenvalue law.
    Eigs,
    /// Group weights and the weight law.
    Weights,
    /// Singular orders estimated from the weight growth.
    RecoverNu,
    /// Wronskian, oracle and contraction checks.
    Verify,
    /// Integral-equation solutions and eigenvalues against direct integration.
    OracleDiff,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Fss => "fss",
            Command::Stokes => "stokes",
            Command::Eigs => "eigs",
            Command::Weights => "weights",
            Command::RecoverNu => "recover-nu",
            Command::Verify => "verify",
            Command::OracleDiff => "oracle-diff",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "msl", version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Problem description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the directory of the config file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Factor applied to every solver tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
}

#[derive(Serialize)]
struct ErrorRecord {
    kind: ErrorKind,
    message: String,
}

/// Exit status for a failed check suite; errors use `2 +` their kind.
const CHECKS_FAILED: u8 = 1;

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Input => 2,
        ErrorKind::Domain => 3,
        ErrorKind::Accuracy => 4,
        ErrorKind::Regime => 5,
    }
}

fn configure_jobs(jobs: Option<usize>) -> Result<(), Error> {
    let Some(n) = jobs else {
        return Ok(());
    };
    if n == 0 {
        return Err(Error::InvalidInput("--jobs must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidInput(format!("--jobs: {e}")))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, Error> {
    configure_jobs(cli.jobs)?;
    let mut cfg = Config::load(&cli.config)?;
    cfg.scale_tolerances(cli.tol_scale)?;
    let problem = cfg.problem()?;
    let outcome = match cli.command {
        Command::Fss => commands::fss(&cfg, &problem),
        Command::Stokes => commands::stokes(&cfg, &problem),
        Command::Eigs => commands::eigs(&cfg, &problem),
        Command::Weights => commands::weights(&cfg, &problem),
        Command::RecoverNu => commands::recover(&cfg, &problem),
        Command::Verify => commands::verify(&cfg, &problem),
        Command::OracleDiff => commands::oracle_diff(&cfg, &problem),
    }?;
    let dir = match &cli.out {
        Some(d) => d.clone(),
        None => cli
            .config
            .parent()
            .map(|p| p.to_path_buf())
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    let sink = Sink::new(dir)?;
    sink.write(cli.command.name(), &outcome.table, &outcome.json, &cfg, &cli.config, cli.tol_scale)?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}: one or more checks failed", cli.command.name());
            ExitCode::from(CHECKS_FAILED)
        }
        Err(e) => {
            let record = ErrorRecord {
                kind: e.kind(),
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&record).expect("error record serializes"));
            ExitCode::from(exit_code(record.kind))
        }
    }
}
