//! `lattice-limit`: runs convergence experiments described by a JSON
//! configuration and writes a report, a rate table and grid snapshots.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod run;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VERDICT_FAILED: u8 = 1;
const EXIT_INVALID_CONFIG: u8 = 2;
const EXIT_RUN_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "lattice-limit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write report.json, rates.csv and grids/ to OUT.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the number of cores.
        #[arg(long, env = "LATTICE_LIMIT_THREADS")]
        threads: Option<usize>,
    },
    /// Check a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    let source = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(ExitCode::from(EXIT_INVALID_CONFIG));
        }
    };
    ExperimentConfig::parse(&source).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_INVALID_CONFIG)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!("{}: valid {} configuration", config.display(), cfg.experiment.name());
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config, out, threads } => {
            let cfg = match load(&config) {
                Ok(cfg) => cfg,
                Err(code) => return code,
            };
            if let Some(n) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: cannot start {n} worker threads: {e}");
                    return ExitCode::from(EXIT_RUN_FAILED);
                }
            }
            let result = run::run(&cfg).and_then(|outcome| {
                output::write_outputs(&out, &cfg, &outcome)?;
                Ok(outcome.pass())
            });
            match result {
                Ok(true) => {
                    println!("{}: pass", cfg.experiment.name());
                    ExitCode::SUCCESS
                }
                Ok(false) => {
                    println!("{}: FAIL (see {})", cfg.experiment.name(), out.join("report.json").display());
                    ExitCode::from(EXIT_VERDICT_FAILED)
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_RUN_FAILED)
                }
            }
        }
    }
}
