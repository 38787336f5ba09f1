//! Command-line front end: config parsing, the commands and their outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use commands::execute;
pub use config::{Command, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hireg", version, about = "Explicit a-priori constants, solvers and numerical verification")]
struct Args {
    /// Overrides `[run] command`.
    #[arg(value_enum)]
    command: Option<Command>,
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Pass tolerance of the solver-dependent checks.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
}

fn prepare(args: Args) -> Result<(RunConfig, Command), CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.set_seed(s);
    }
    if let Some(o) = args.out {
        cfg.out = o;
    }
    if let Some(t) = args.tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be finite and >= 0, got {t}")));
        }
        cfg.set_tol(t);
    }
    let command = args
        .command
        .or(cfg.command)
        .ok_or_else(|| CliError::Usage("no command given (argument or [run] command)".into()))?;
    Ok((cfg, command))
}

/// Runs the program and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match prepare(args).and_then(|(cfg, cmd)| execute(&cfg, cmd)) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
