//! Locating runs on disk: a directory written by `simulate`, or one explicit
//! IMU/ground-truth file pair.

use std::path::{Path, PathBuf};

use clap::Args;
use morpi::io::{read_gt_csv, read_imu_csv};
use morpi::preprocess::{prepare, Prepared};
use morpi::simulator::{Role, Scenario};
use morpi::{ImuSample, Trajectory};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Name of the scenario copy inside a simulated data directory.
pub const SCENARIO_FILE: &str = "scenario.toml";
pub const IMU_FILE: &str = "imu.csv";
pub const GT_FILE: &str = "gt.csv";

#[derive(Args, Clone, Debug, Default)]
pub struct DataArgs {
    /// Directory written by `simulate`; runs are picked by role.
    #[arg(long, env = "MORPI_DATA", conflicts_with_all = ["imu", "gt"])]
    pub data: Option<PathBuf>,
    /// IMU CSV (`t,fx,fy,wz`); requires --gt.
    #[arg(long, requires = "gt")]
    pub imu: Option<PathBuf>,
    /// Ground-truth CSV (`t,x,y,vx,vy,psi`); requires --imu.
    #[arg(long, requires = "imu")]
    pub gt: Option<PathBuf>,
    /// Run name for a file pair; defaults to the IMU file's directory name.
    #[arg(long)]
    pub name: Option<String>,
    /// Stationary prefix of a file pair, s.
    #[arg(long)]
    pub stationary: Option<f64>,
}

/// One run as read from disk.
#[derive(Clone, Debug)]
pub struct RunData {
    pub name: String,
    pub role: Role,
    /// Stationary prefix used for calibration and trimming, s.
    pub stationary: f64,
    pub imu: Vec<ImuSample>,
    pub gt: Trajectory,
}

impl RunData {
    pub fn prepare(&self, calibrate: bool) -> CliResult<Prepared> {
        prepare(&self.imu, &self.gt, self.stationary, calibrate)
            .map_err(|e| CliError::data(format!("run `{}`: {e}", self.name)))
    }
}

pub fn run_dir(root: &Path, name: &str) -> PathBuf {
    root.join(name)
}

/// Every run of a simulated data directory, in scenario order.
pub fn load_dir(dir: &Path) -> CliResult<Vec<RunData>> {
    let scenario_path = dir.join(SCENARIO_FILE);
    if !scenario_path.exists() {
        return Err(CliError::data(format!(
            "{}: not a data directory (missing {SCENARIO_FILE})",
            dir.display()
        )));
    }
    let scenario = Scenario::load(&scenario_path).map_err(|e| CliError::data(e.to_string()))?;
    scenario
        .runs
        .iter()
        .map(|spec| {
            let d = run_dir(dir, &spec.name);
            Ok(RunData {
                name: spec.name.clone(),
                role: spec.role,
                stationary: spec.stationary.unwrap_or(spec.role.default_stationary()),
                imu: read_imu_csv(d.join(IMU_FILE))?,
                gt: read_gt_csv(d.join(GT_FILE))?,
            })
        })
        .collect()
}

/// Runs with `role` from the data directory, or the explicit file pair.
pub fn select(args: &DataArgs, cfg: &RunConfig, role: Role) -> CliResult<Vec<RunData>> {
    if let Some(dir) = &args.data {
        let runs: Vec<_> = load_dir(dir)?.into_iter().filter(|r| r.role == role).collect();
        if runs.is_empty() {
            let kind = match role {
                Role::Train => "training",
                Role::Test => "test",
            };
            return Err(CliError::data(format!("{}: no {kind} runs", dir.display())));
        }
        return Ok(runs);
    }
    let (Some(imu), Some(gt)) = (&args.imu, &args.gt) else {
        return Err(CliError::usage("give either --data DIR or both --imu and --gt"));
    };
    let name = args.name.clone().unwrap_or_else(|| {
        imu.parent()
            .and_then(Path::file_name)
            .map(|s| s.to_string_lossy().into_owned())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| "run".into())
    });
    let stationary = args.stationary.unwrap_or(match role {
        Role::Train => cfg.train_stationary,
        Role::Test => cfg.test_stationary,
    });
    Ok(vec![RunData {
        name,
        role,
        stationary,
        imu: read_imu_csv(imu)?,
        gt: read_gt_csv(gt)?,
    }])
}
