use std::path::Path;

use morpi::metrics::{align, velocity_range, ComparisonTable, EvalReport};
use morpi::pinn::{predict_trajectory, Anchoring, Checkpoint, HeadingSource, Precision, PredictOptions};
use morpi::preprocess::Prepared;
use morpi::strapdown::{dead_reckon, distances_from_speed, distances_from_truth, mechanize, DistanceSource};
use morpi::{ImuSample, NavState, Scalar, Trajectory};
use serde::Serialize;

use crate::config::RunConfig;
use crate::data::RunData;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_columns, write_json, write_text};

use super::{Metrics, DR, INS, PINN};

pub const EVAL_REPORT: &str = "eval_report.json";
pub const EVAL_TABLE: &str = "eval_table.txt";
pub const PLOT_DIR: &str = "plots";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodMetrics {
    pub method: &'static str,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryEval {
    pub name: String,
    pub duration: f64,
    pub methods: Vec<MethodMetrics>,
    /// Some network input lay beyond the extrapolation threshold.
    pub extrapolated: bool,
    pub max_abs_z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalSummary {
    pub heading: HeadingSource,
    pub trajectories: Vec<TrajectoryEval>,
    pub table: ComparisonTable,
}

/// Time series behind the path and error plots of one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub gt: Trajectory,
    /// Estimates in `[INS, DR, PINN]` order, on the timestamps of `gt`.
    pub estimates: [Trajectory; 3],
}

fn predict<T: Scalar>(ckpt: &Checkpoint, p: &Prepared, options: PredictOptions) -> CliResult<(Trajectory, bool, f64)> {
    let model = ckpt.model::<T>()?;
    let imu: Vec<ImuSample<T>> = p.imu.iter().map(ImuSample::cast).collect();
    let pred = predict_trajectory(&model, &imu, &p.initial.cast(), Anchoring::Chained, options)?;
    Ok((pred.trajectory.cast(), pred.extrapolated, pred.max_abs_z))
}

fn truth_distances(p: &Prepared) -> CliResult<Vec<f64>> {
    let last = p.gt.last().map_or(0.0, |s| s.t);
    let states = p
        .imu
        .iter()
        .map(|u| p.gt.interpolate(u.t.min(last)))
        .collect::<Option<Vec<NavState>>>()
        .ok_or_else(|| CliError::data("ground truth does not cover the IMU stream"))?;
    Ok(distances_from_truth(&Trajectory::from_states(states)?))
}

/// Runs the three estimators on every test run and tabulates their ATE.
pub fn evaluate(cfg: &RunConfig, ckpt: &Checkpoint, runs: &[RunData]) -> CliResult<(EvalSummary, Vec<PlotSeries>)> {
    let options = PredictOptions {
        heading: cfg.pinn.heading,
        min_heading_speed: cfg.pinn.min_heading_speed,
    };
    let mut trajectories = Vec::with_capacity(runs.len());
    let mut plots = Vec::with_capacity(runs.len());
    for run in runs {
        let p = run.prepare(cfg.calibrate)?;
        let ins = mechanize(&p.initial, &p.imu, &cfg.pinn.gravity, cfg.scheme)?;
        let distances = match cfg.dr_distance {
            DistanceSource::Mechanized => distances_from_speed(&ins),
            DistanceSource::Truth => truth_distances(&p)?,
        };
        let dr = dead_reckon(&p.initial, &p.imu, &distances)?;
        let (pinn, extrapolated, max_abs_z) = match ckpt.precision {
            Precision::F64 => predict::<f64>(ckpt, &p, options)?,
            Precision::F32 => predict::<f32>(ckpt, &p, options)?,
        };
        if extrapolated {
            log::warn!(
                "run `{}`: network inputs reach {max_abs_z:.1} standard deviations",
                run.name
            );
        }
        let range = velocity_range(&p.gt, cfg.velocity_range)?;
        let mut methods = Vec::with_capacity(3);
        let mut aligned = Vec::with_capacity(3);
        let mut gt_aligned = None;
        for (name, est) in [(INS, &ins), (DR, &dr), (PINN, &pinn)] {
            let report = EvalReport::evaluate(&p.gt, est, range)?;
            methods.push(MethodMetrics {
                method: name,
                metrics: Metrics::from(&report),
            });
            let (g, e) = align(&p.gt, est)?;
            gt_aligned.get_or_insert(g);
            aligned.push(e);
        }
        let [a, b, c]: [Trajectory; 3] = aligned.try_into().expect("three estimates");
        plots.push(PlotSeries {
            name: run.name.clone(),
            gt: gt_aligned.expect("three estimates"),
            estimates: [a, b, c],
        });
        trajectories.push(TrajectoryEval {
            name: run.name.clone(),
            duration: p.gt.duration(),
            methods,
            extrapolated,
            max_abs_z,
        });
    }
    let names = trajectories.iter().map(|t| t.name.clone()).collect();
    let per_method = [INS, DR, PINN]
        .iter()
        .enumerate()
        .map(|(k, m)| {
            (
                m.to_string(),
                trajectories.iter().map(|t| t.methods[k].metrics.ate).collect(),
            )
        })
        .collect();
    let table = ComparisonTable::new(names, per_method, PINN)?;
    Ok((
        EvalSummary {
            heading: options.heading,
            trajectories,
            table,
        },
        plots,
    ))
}

/// Writes `<name>_paths.csv` (ground truth and every estimate) and
/// `<name>_errors.csv` (position error over time per method).
pub fn write_plots(dir: &Path, plots: &[PlotSeries]) -> CliResult<()> {
    ensure_dir(dir)?;
    for s in plots {
        let [ins, dr, pinn] = &s.estimates;
        let rows = |k: usize| {
            let g = &s.gt.states()[k];
            let e = [&ins.states()[k], &dr.states()[k], &pinn.states()[k]];
            (g, e)
        };
        write_columns(
            &dir.join(format!("{}_paths.csv", s.name)),
            &[
                "t", "gt_x", "gt_y", "ins_x", "ins_y", "dr_x", "dr_y", "pinn_x", "pinn_y",
            ],
            (0..s.gt.len()).map(|k| {
                let (g, e) = rows(k);
                vec![g.t, g.x, g.y, e[0].x, e[0].y, e[1].x, e[1].y, e[2].x, e[2].y]
            }),
        )?;
        write_columns(
            &dir.join(format!("{}_errors.csv", s.name)),
            &["t", "ins", "dr", "pinn"],
            (0..s.gt.len()).map(|k| {
                let (g, e) = rows(k);
                let d = |s: &NavState| (s.x - g.x).hypot(s.y - g.y);
                vec![g.t, d(e[0]), d(e[1]), d(e[2])]
            }),
        )?;
    }
    Ok(())
}

pub fn eval(cfg: &RunConfig, ckpt: &Checkpoint, runs: &[RunData], out: &Path) -> CliResult<EvalSummary> {
    let (summary, plots) = evaluate(cfg, ckpt, runs)?;
    ensure_dir(out)?;
    write_json(&out.join(EVAL_REPORT), &summary)?;
    write_text(&out.join(EVAL_TABLE), &summary.table.to_text())?;
    write_plots(&out.join(PLOT_DIR), &plots)?;
    Ok(summary)
}
