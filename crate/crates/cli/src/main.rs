//! `mpdo-kit`: analysis, factorization, conversion and experiments for
//! decompositions of psd operators and factorizations of nonnegative matrices.

mod analyze;
mod convert;
mod error;
mod experiment;
mod factorize;
mod input;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::report::Report;

#[derive(Debug, Parser)]
#[command(name = "mpdo-kit", version, about)]
struct Cli {
    /// Print the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ranks, purification interval and bound checks for a multi-site psd operator.
    Analyze(analyze::AnalyzeArgs),
    /// Factorize a nonnegative matrix.
    Factorize(factorize::FactorizeArgs),
    /// Convert between a factorization and a decomposition of the diagonal operator.
    Convert(convert::ConvertArgs),
    /// Run one of the built-in experiments: wstate, tgon, mixedw, bounds.
    Experiment(experiment::ExperimentArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Factorize(_) => "factorize",
            Command::Convert(_) => "convert",
            Command::Experiment(_) => "experiment",
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("MPDO_KIT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("MPDO_KIT_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))
}

fn status_code(status: &str) -> u8 {
    match status {
        "ok" => 0,
        "rejected" => 3,
        _ => 1,
    }
}

fn dispatch(command: &Command) -> CliResult<Report> {
    configure_threads()?;
    match command {
        Command::Analyze(a) => analyze::run(a),
        Command::Factorize(a) => factorize::run(a),
        Command::Convert(a) => convert::run(a),
        Command::Experiment(a) => experiment::run(a),
    }
}

fn error_report(command: &str, e: &CliError) -> Report {
    let mut rep = Report::new(command, Value::Null, json!({}), None);
    rep.status = match e {
        CliError::Usage(_) => "error",
        CliError::Exhausted(_) => "exhausted",
        CliError::Rejected(_) => "rejected",
    }
    .into();
    rep.notes.push(e.to_string());
    rep
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let started = Instant::now();
    let (mut rep, code) = match dispatch(&cli.command) {
        Ok(rep) => {
            let code = status_code(&rep.status);
            (rep, code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            (error_report(cli.command.name(), &e), e.exit_code())
        }
    };
    rep.stamp(started);
    if cli.json {
        println!("{}", rep.to_json());
    } else if code == 0 || !rep.quantities.is_empty() {
        print!("{}", rep.to_text());
    }
    ExitCode::from(code)
}
