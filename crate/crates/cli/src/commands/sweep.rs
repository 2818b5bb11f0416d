use std::path::Path;

use morpi::pinn::StopReason;
use serde::Serialize;

use crate::config::RunConfig;
use crate::data::RunData;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_epoch_log, write_json};

use super::eval::evaluate;
use super::train::{fit, CHECKPOINT_FILE, EPOCH_LOG_FILE};
use super::{INS, PINN};

pub const SWEEP_REPORT: &str = "sweep.json";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub lambda_data: f64,
    pub lambda_init: f64,
    pub lambda_phys: f64,
    pub epochs: usize,
    pub stop: StopReason,
    pub best_val: Option<f64>,
    pub ins_average_ate: f64,
    pub pinn_average_ate: f64,
}

/// Trains and evaluates once per λ combination; each point keeps its own
/// checkpoint and epoch log under `out/<index>/`.
pub fn sweep(cfg: &RunConfig, train_runs: &[RunData], test_runs: &[RunData], out: &Path) -> CliResult<Vec<SweepPoint>> {
    let grid = cfg.sweep.grid();
    if grid.is_empty() {
        return Err(CliError::usage("sweep grid is empty"));
    }
    ensure_dir(out)?;
    let mut points = Vec::with_capacity(grid.len());
    for (i, w) in grid.into_iter().enumerate() {
        log::info!(
            "sweep point {}: λ_data {} λ_init {} λ_phys {}",
            i,
            w.lambda_data,
            w.lambda_init,
            w.lambda_phys
        );
        let mut c = cfg.clone();
        c.pinn.loss = w;
        let dir = out.join(format!("{i:03}"));
        ensure_dir(&dir)?;
        let result = fit(&c, train_runs, None)?;
        result.checkpoint.write(dir.join(CHECKPOINT_FILE))?;
        write_epoch_log(&dir.join(EPOCH_LOG_FILE), &result.log)?;
        let (summary, _) = evaluate(&c, &result.checkpoint, test_runs)?;
        let avg = |m: &str| {
            summary
                .table
                .rows
                .iter()
                .find(|r| r.method == m)
                .map_or(f64::NAN, |r| r.average)
        };
        points.push(SweepPoint {
            lambda_data: w.lambda_data,
            lambda_init: w.lambda_init,
            lambda_phys: w.lambda_phys,
            epochs: result.log.len(),
            stop: result.stop,
            best_val: result.checkpoint.training.as_ref().and_then(|t| t.best_val),
            ins_average_ate: avg(INS),
            pinn_average_ate: avg(PINN),
        });
    }
    write_json(&out.join(SWEEP_REPORT), &points)?;
    Ok(points)
}

pub fn sweep_text(points: &[SweepPoint]) -> String {
    let mut s = format!(
        "{:>8} {:>8} {:>8} {:>7} {:>11} {:>10} {:>10}\n",
        "λ_data", "λ_init", "λ_phys", "epochs", "best val", "INS ATE", "PINN ATE"
    );
    for p in points {
        s.push_str(&format!(
            "{:>8} {:>8} {:>8} {:>7} {:>11.3e} {:>10.3} {:>10.3}\n",
            p.lambda_data,
            p.lambda_init,
            p.lambda_phys,
            p.epochs,
            p.best_val.unwrap_or(f64::NAN),
            p.ins_average_ate,
            p.pinn_average_ate
        ));
    }
    s
}
