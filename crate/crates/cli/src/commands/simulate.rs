use std::path::Path;

use morpi::io::{write_gt_csv, write_imu_csv};
use morpi::simulator::{Role, Scenario};
use serde::Serialize;

use crate::config::RunConfig;
use crate::data::{run_dir, GT_FILE, IMU_FILE, SCENARIO_FILE};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_text};

/// Built-in scenario names accepted in place of a file path.
pub const BUILTIN_SCENARIOS: [&str; 2] = ["desk", "reference"];

pub fn resolve_scenario(spec: Option<&str>) -> CliResult<Scenario> {
    match spec.unwrap_or("desk") {
        "desk" => Ok(Scenario::desk()),
        "reference" => Ok(Scenario::reference()),
        path => Scenario::load(Path::new(path)).map_err(CliError::from),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub role: Role,
    /// Including the stationary prefix, s.
    pub duration: f64,
    pub path_length: f64,
    pub imu_samples: usize,
    pub gt_samples: usize,
    pub gyro_bias: f64,
    pub accel_bias: f64,
    pub gyro_sigma: f64,
    pub accel_sigma: f64,
}

/// Simulates every run of the scenario into `out/<run>/{imu,gt}.csv` and
/// stores the effective scenario as `out/scenario.toml`.
pub fn simulate(cfg: &RunConfig, out: &Path) -> CliResult<Vec<RunSummary>> {
    let mut scenario = resolve_scenario(cfg.scenario.as_deref())?;
    if let Some(seed) = cfg.seed {
        scenario.seed = seed;
    }
    if let Some(scale) = cfg.error_scale {
        scenario.error_scale = scale;
    }
    scenario.validate()?;
    ensure_dir(out)?;
    let mut summaries = Vec::with_capacity(scenario.runs.len());
    for i in 0..scenario.runs.len() {
        let run = scenario.simulate_run(i)?;
        let dir = run_dir(out, &run.name);
        ensure_dir(&dir)?;
        write_imu_csv(dir.join(IMU_FILE), &run.imu)?;
        write_gt_csv(dir.join(GT_FILE), &run.gt)?;
        summaries.push(RunSummary {
            name: run.name.clone(),
            role: run.role,
            duration: run.truth.duration(),
            path_length: run.truth.path_length(),
            imu_samples: run.imu.len(),
            gt_samples: run.gt.len(),
            gyro_bias: run.error_spec.gyro_bias,
            accel_bias: run.error_spec.accel_bias,
            gyro_sigma: run.error_spec.gyro_sigma(),
            accel_sigma: run.error_spec.accel_sigma(),
        });
    }
    write_text(&out.join(SCENARIO_FILE), &scenario.to_toml())?;
    Ok(summaries)
}

pub fn summary_text(runs: &[RunSummary]) -> String {
    let mut s = format!(
        "{:<12} {:<5} {:>9} {:>9} {:>8} {:>11} {:>11} {:>11} {:>11}\n",
        "run", "role", "dur [s]", "path [m]", "samples", "gyro bias", "accel bias", "gyro σ", "accel σ"
    );
    for r in runs {
        let role = match r.role {
            Role::Train => "train",
            Role::Test => "test",
        };
        s.push_str(&format!(
            "{:<12} {:<5} {:>9.2} {:>9.2} {:>8} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e}\n",
            r.name,
            role,
            r.duration,
            r.path_length,
            r.imu_samples,
            r.gyro_bias,
            r.accel_bias,
            r.gyro_sigma,
            r.accel_sigma
        ));
    }
    s
}
