use std::path::Path;

use morpi::io::write_gt_csv;
use morpi::metrics::{velocity_range, EvalReport};
use morpi::strapdown::{mechanize, SensorBias};
use serde::Serialize;

use crate::config::RunConfig;
use crate::data::RunData;
use crate::error::CliResult;
use crate::output::{ensure_dir, write_json};

use super::Metrics;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineRun {
    pub name: String,
    pub bias: SensorBias,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineReport {
    pub method: &'static str,
    pub runs: Vec<BaselineRun>,
}

pub const BASELINE_REPORT: &str = "baseline_report.json";

/// Calibrates, trims and mechanizes each run; writes `<run>_ins.csv` and the report.
pub fn baseline(cfg: &RunConfig, runs: &[RunData], out: &Path) -> CliResult<BaselineReport> {
    ensure_dir(out)?;
    let mut report = BaselineReport {
        method: super::INS,
        runs: Vec::new(),
    };
    for run in runs {
        let p = run.prepare(cfg.calibrate)?;
        let est = mechanize(&p.initial, &p.imu, &cfg.pinn.gravity, cfg.scheme)?;
        let range = velocity_range(&p.gt, cfg.velocity_range)?;
        let eval = EvalReport::evaluate(&p.gt, &est, range)?;
        write_gt_csv(out.join(format!("{}_ins.csv", run.name)), &est)?;
        report.runs.push(BaselineRun {
            name: run.name.clone(),
            bias: p.bias,
            metrics: Metrics::from(&eval),
        });
    }
    write_json(&out.join(BASELINE_REPORT), &report)?;
    Ok(report)
}

pub fn report_text(report: &BaselineReport) -> String {
    let mut s = format!(
        "{:<12} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
        "run", "ATE [m]", "VRMSE x", "VRMSE y", "NVRMSE x", "NVRMSE y"
    );
    for r in &report.runs {
        let m = &r.metrics;
        s.push_str(&format!(
            "{:<12} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3}\n",
            r.name, m.ate, m.vrmse_x, m.vrmse_y, m.nvrmse_x, m.nvrmse_y
        ));
    }
    s
}
