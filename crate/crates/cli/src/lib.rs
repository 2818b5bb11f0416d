//! Command-line driver for the inertial navigation toolkit.
//!
//! Every command reads one optional TOML run configuration (`--config`),
//! applies flag overrides (each also settable as `MORPI_<FLAG>`), and writes
//! its artifacts under `--out`. Errors map to exit status 1 (usage), 2 (data)
//! or 3 (numerical).

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use morpi::pinn::Checkpoint;
use morpi::simulator::Role;

use crate::commands::{baseline, eval, simulate, sweep, train};
use crate::config::{Overrides, RunConfig};
use crate::data::{select, DataArgs};
use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "morpi",
    version,
    about = "Pure inertial navigation for snake-driven wheeled robots"
)]
pub struct Cli {
    /// TOML run configuration; missing keys keep their defaults.
    #[arg(long, global = true, env = "MORPI_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "MORPI_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Omit wall-clock metadata so repeated runs write identical files.
    #[arg(long, global = true, env = "MORPI_REPRODUCIBLE")]
    pub reproducible: bool,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate IMU and ground-truth CSVs for every run of a scenario.
    Simulate {
        /// Scenario file, or `desk` / `reference`.
        #[arg(long, env = "MORPI_SCENARIO")]
        scenario: Option<String>,
    },
    /// Calibrated strapdown mechanization of the test runs.
    Baseline {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Train the network on the training runs.
    Train {
        #[command(flatten)]
        data: DataArgs,
        /// Continue from a checkpoint written by an earlier `train`.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Compare the network with the inertial and dead-reckoning baselines on the test runs.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, env = "MORPI_CHECKPOINT")]
        checkpoint: PathBuf,
    },
    /// Train and evaluate once per loss-weight combination of the sweep grid.
    Sweep {
        #[command(flatten)]
        data: DataArgs,
    },
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg)?;
    Ok(cfg)
}

/// Evaluation settings: the checkpoint's own network settings unless a
/// configuration file or a shape flag was given, which must then agree.
fn eval_config(cli: &Cli, ckpt: &Checkpoint) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig {
            pinn: ckpt.config.clone(),
            ..RunConfig::default()
        },
    };
    cli.overrides.apply(&mut cfg)?;
    if cli.config.is_some() || cli.overrides.touches_network() {
        ckpt.check_architecture(&cfg.pinn.network.architecture())
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    Ok(cfg)
}

fn read_checkpoint(path: &std::path::Path) -> CliResult<Checkpoint> {
    Checkpoint::read(path).map_err(|e| CliError::data(e.to_string()))
}

/// Runs one parsed command; human-readable summaries go to stdout.
pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate { scenario } => {
            let mut cfg = load_config(cli)?;
            if scenario.is_some() {
                cfg.scenario.clone_from(scenario);
            }
            let runs = simulate::simulate(&cfg, &cli.out)?;
            print!("{}", simulate::summary_text(&runs));
        }
        Command::Baseline { data } => {
            let cfg = load_config(cli)?;
            let runs = select(data, &cfg, Role::Test)?;
            let report = baseline::baseline(&cfg, &runs, &cli.out)?;
            print!("{}", baseline::report_text(&report));
        }
        Command::Train { data, resume } => {
            let cfg = load_config(cli)?;
            let runs = select(data, &cfg, Role::Train)?;
            let previous = resume.as_deref().map(read_checkpoint).transpose()?;
            let r = train::train(&cfg, &runs, previous.as_ref(), &cli.out, cli.reproducible)?;
            let last = r.log.last();
            println!(
                "{} training / {} validation windows; {} epochs; stop: {:?}",
                r.train_windows,
                r.val_windows,
                last.map_or(0, |l| l.epoch),
                r.stop
            );
            if let Some(best) = r.checkpoint.training.as_ref().and_then(|t| t.best_val) {
                println!("best validation loss {best:.4e}");
            }
            println!("checkpoint: {}", cli.out.join(train::CHECKPOINT_FILE).display());
        }
        Command::Eval { data, checkpoint } => {
            let ckpt = read_checkpoint(checkpoint)?;
            let cfg = eval_config(cli, &ckpt)?;
            let runs = select(data, &cfg, Role::Test)?;
            let summary = eval::eval(&cfg, &ckpt, &runs, &cli.out)?;
            print!("{}", summary.table.to_text());
        }
        Command::Sweep { data } => {
            let cfg = load_config(cli)?;
            let train_runs = select(data, &cfg, Role::Train)?;
            let test_runs = select(data, &cfg, Role::Test)?;
            let points = sweep::sweep(&cfg, &train_runs, &test_runs, &cli.out)?;
            print!("{}", sweep::sweep_text(&points));
        }
    }
    Ok(())
}
