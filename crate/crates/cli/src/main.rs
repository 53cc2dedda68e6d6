//! `syncbuck`: analytic loop gains, switching simulation and simulated
//! frequency-response measurement for digitally controlled buck converters.

mod commands;
mod compare;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use syncbuck_core::sfra::Measurement;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "syncbuck", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic G_Plant, T_pul, T_i and T_c curves.
    Model {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Drop the sampling-synchronization term (baseline model).
        #[arg(long)]
        no_sync: bool,
        /// Also compare T_i with the sideband series truncated at N.
        #[arg(long, value_name = "N")]
        series_check: Option<usize>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Closed-loop steady state and waveform.
    Simulate {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "N")]
        cycles: Option<usize>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Simulated frequency-response sweep.
    Sfra {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, default_value = "digital", value_parser = parse_measurement)]
        which: Measurement,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Compare a measured Bode CSV against a model Bode CSV.
    Compare {
        model: PathBuf,
        measured: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        tol_db: f64,
        #[arg(long, default_value_t = 5.0)]
        tol_deg: f64,
        /// Write per-point deltas to DIR/compare.csv.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn parse_measurement(s: &str) -> Result<Measurement, String> {
    s.parse().map_err(|_| "expected digital, analog or closedloop".to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Model {
            config,
            no_sync,
            series_check,
            out,
        } => {
            let mut rc = RunConfig::load(&config)?;
            rc.sync_enabled &= !no_sync;
            if series_check.is_some() {
                rc.series_n = series_check;
            }
            let dir = out.unwrap_or_else(|| rc.out_dir.clone());
            commands::model(&rc, &dir)
        }
        Command::Simulate { config, cycles, out } => {
            let rc = RunConfig::load(&config)?;
            let dir = out.unwrap_or_else(|| rc.out_dir.clone());
            commands::simulate(&rc, cycles.unwrap_or(rc.sim_cycles), &dir)
        }
        Command::Sfra { config, which, out } => {
            let rc = RunConfig::load(&config)?;
            let dir = out.unwrap_or_else(|| rc.out_dir.clone());
            commands::sfra(&rc, which, &dir)
        }
        Command::Compare {
            model,
            measured,
            tol_db,
            tol_deg,
            out,
        } => commands::compare_files(&model, &measured, tol_db, tol_deg, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::CompareFail) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
