//! `mirror-emission`: rate curves, Fourier spectra and closed-orbit
//! predictions for a dipole between two mirrors.

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::io::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{with_suffix, Flags, Params};

/// Environment variable capping the worker thread count.
const THREADS_VAR: &str = "MIRROR_EMISSION_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Sampling(String),
    /// Carries the report, which is still emitted.
    Verify(String),
}

impl From<mirror_emission::Error> for CliError {
    fn from(e: mirror_emission::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "mirror-emission", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Golden-rule rate at one scale factor
    Rate(Flags),
    /// Rate curve over the alpha window
    Curve(Flags),
    /// Windowed Fourier transform of the rate curve
    Spectrum(Flags),
    /// Detected spectrum peaks matched to closed-orbit actions
    Peaks(Flags),
    /// Closed orbits of one configuration
    Orbits(Flags),
    /// Predicted peak positions and heights
    Predict(Flags),
    /// Golden-rule curve beside orbit sums of several sizes
    Reconstruct(Flags),
    /// Peak positions over a range of R, plus the orbit family curves
    Sweep(Flags),
    /// Detected against predicted peaks for R = 0, 1/3, 3/5
    Table1(Flags),
    /// Field-level (and with --modes, cavity-mode) self checks
    Verify(Flags),
}

impl Command {
    fn split(self) -> (&'static str, Flags) {
        match self {
            Command::Rate(f) => ("rate", f),
            Command::Curve(f) => ("curve", f),
            Command::Spectrum(f) => ("spectrum", f),
            Command::Peaks(f) => ("peaks", f),
            Command::Orbits(f) => ("orbits", f),
            Command::Predict(f) => ("predict", f),
            Command::Reconstruct(f) => ("reconstruct", f),
            Command::Sweep(f) => ("sweep", f),
            Command::Table1(f) => ("table1", f),
            Command::Verify(f) => ("verify", f),
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR}: bad thread count `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn emit(params: &Params, output: &commands::Output) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Usage(e.to_string());
    match &params.out {
        Some(path) => {
            commands::write_atomic(path, &output.body).map_err(io_err)?;
            for (suffix, text) in &output.extras {
                commands::write_atomic(&with_suffix(path, suffix), text).map_err(io_err)?;
            }
        }
        None => {
            std::io::stdout()
                .write_all(output.body.as_bytes())
                .map_err(io_err)?;
        }
    }
    match params.manifest_path() {
        Some(path) => commands::write_atomic(&path, &params.manifest()).map_err(io_err),
        None => {
            eprint!("{}", params.manifest());
            Ok(())
        }
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::try_parse().map_err(|e| {
        // help and version are not failures
        if !e.use_stderr() {
            let _ = e.print();
            std::process::exit(0);
        }
        CliError::Usage(e.to_string().trim_start_matches("error: ").to_string())
    })?;
    init_threads()?;
    let (name, flags) = cli.command.split();
    let params = Params::resolve(name, &flags)?;
    match commands::run(&params) {
        Ok(output) => emit(&params, &output),
        Err(CliError::Verify(report)) => {
            emit(&params, &report.into())?;
            Err(CliError::Verify(String::new()))
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {}", msg.trim_end());
            ExitCode::from(1)
        }
        Err(CliError::Sampling(report)) => {
            eprintln!("error: sampling rules violated (use --force to proceed)\n{report}");
            ExitCode::from(2)
        }
        Err(CliError::Verify(_)) => {
            eprintln!("error: verification failed");
            ExitCode::from(3)
        }
    }
}
