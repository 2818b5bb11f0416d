//! Trajectory error metrics and the method comparison table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{time_tolerance, Trajectory};

fn check_aligned<T: Scalar>(gt: &Trajectory<T>, pred: &Trajectory<T>) -> Result<()> {
    if gt.len() != pred.len() {
        return Err(Error::Shape(format!(
            "trajectories misaligned: {} ground-truth vs {} predicted samples",
            gt.len(),
            pred.len()
        )));
    }
    if gt.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    for (i, (a, b)) in gt.states().iter().zip(pred.states()).enumerate() {
        if (a.t - b.t).abs() > time_tolerance(a.t) {
            return Err(Error::Shape(format!(
                "trajectories misaligned at sample {i}: t = {} vs {}",
                a.t, b.t
            )));
        }
    }
    Ok(())
}

/// Per-sample position error norms of aligned trajectories.
pub fn position_errors<T: Scalar>(gt: &Trajectory<T>, pred: &Trajectory<T>) -> Result<Vec<T>> {
    check_aligned(gt, pred)?;
    Ok(gt
        .states()
        .iter()
        .zip(pred.states())
        .map(|(a, b)| (a.x - b.x).hypot(a.y - b.y))
        .collect())
}

/// Absolute trajectory error: RMS of the position error norms.
pub fn ate<T: Scalar>(gt: &Trajectory<T>, pred: &Trajectory<T>) -> Result<T> {
    check_aligned(gt, pred)?;
    let sum: T = gt
        .states()
        .iter()
        .zip(pred.states())
        .map(|(a, b)| {
            let (dx, dy) = (a.x - b.x, a.y - b.y);
            dx * dx + dy * dy
        })
        .sum();
    Ok((sum / T::from_usize(gt.len()).unwrap()).sqrt())
}

/// Root-mean-square error of one velocity axis.
pub fn vrmse<T: Scalar>(gt_v: &[T], pred_v: &[T]) -> Result<T> {
    if gt_v.len() != pred_v.len() {
        return Err(Error::Shape(format!(
            "velocity series misaligned: {} vs {} samples",
            gt_v.len(),
            pred_v.len()
        )));
    }
    if gt_v.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let sum: T = gt_v.iter().zip(pred_v).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok((sum / T::from_usize(gt_v.len()).unwrap()).sqrt())
}

/// How the velocity normalizer is built from the ground-truth series.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VelocityRange {
    /// `max‖v‖ − min‖v‖` over samples, shared by both axes.
    #[default]
    SpeedRange,
    /// `max v_axis − min v_axis`, per axis.
    PerAxis,
}

/// Normalizers `(x, y)` for [`nvrmse`] from a ground-truth velocity series.
pub fn velocity_range<T: Scalar>(gt: &Trajectory<T>, mode: VelocityRange) -> Result<(T, T)> {
    if gt.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let span = |f: &dyn Fn(&crate::NavState<T>) -> T| {
        let (lo, hi) = gt
            .states()
            .iter()
            .map(f)
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
        hi - lo
    };
    Ok(match mode {
        VelocityRange::SpeedRange => {
            let r = span(&|s| s.speed());
            (r, r)
        }
        VelocityRange::PerAxis => (span(&|s| s.vx), span(&|s| s.vy)),
    })
}

/// VRMSE scaled by the ground-truth velocity range.
pub fn nvrmse<T: Scalar>(vrmse_value: T, range: T) -> Result<T> {
    if !(range > T::zero()) {
        return Err(Error::DegenerateRange(format!(
            "ground-truth velocity range is {range}; it must be positive"
        )));
    }
    Ok(vrmse_value / range)
}

/// Relative ATE reduction against a baseline, in percent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub unrounded: f64,
    pub rounded: i64,
}

pub fn improvement_pct(baseline_ate: f64, ours_ate: f64) -> Result<Improvement> {
    if !(baseline_ate > 0.0) || !ours_ate.is_finite() {
        return Err(Error::invalid(format!(
            "improvement needs a positive baseline ATE, got {baseline_ate}"
        )));
    }
    let unrounded = 100.0 * (baseline_ate - ours_ate) / baseline_ate;
    Ok(Improvement {
        unrounded,
        rounded: unrounded.round() as i64,
    })
}

/// Resamples the ground truth onto the prediction timestamps that fall inside
/// the ground-truth span. Returns `(gt, pred)` with identical timestamps.
pub fn align<T: Scalar>(gt: &Trajectory<T>, pred: &Trajectory<T>) -> Result<(Trajectory<T>, Trajectory<T>)> {
    let (first, last) = match (gt.first(), gt.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::InsufficientData { needed: 1, got: 0 }),
    };
    let kept: Vec<_> = pred
        .states()
        .iter()
        .filter(|s| s.t >= first - time_tolerance(first) && s.t <= last + time_tolerance(last))
        .copied()
        .collect();
    if kept.is_empty() {
        return Err(Error::Shape(
            "prediction and ground truth do not overlap in time".into(),
        ));
    }
    let times: Vec<T> = kept.iter().map(|s| s.t).collect();
    let gt_aligned = gt.resample(&times, pred.rate_hz())?;
    Ok((gt_aligned, Trajectory::new(kept, pred.rate_hz())?))
}

/// Error of one sample, for plotting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub t: f64,
    pub position_error: f64,
    pub vx_error: f64,
    pub vy_error: f64,
}

/// Metrics of one estimated trajectory against its ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ate: f64,
    pub vrmse_x: f64,
    pub vrmse_y: f64,
    pub nvrmse_x: f64,
    pub nvrmse_y: f64,
    pub errors: Vec<ErrorSample>,
}

impl EvalReport {
    /// Aligns, then evaluates. `range` normalizes the velocity errors.
    pub fn evaluate<T: Scalar>(gt: &Trajectory<T>, pred: &Trajectory<T>, range: (T, T)) -> Result<Self> {
        let (gt, pred) = align(gt, pred)?;
        let col = |tr: &Trajectory<T>, f: fn(&crate::NavState<T>) -> T| tr.states().iter().map(f).collect::<Vec<_>>();
        let vrmse_x = vrmse(&col(&gt, |s| s.vx), &col(&pred, |s| s.vx))?;
        let vrmse_y = vrmse(&col(&gt, |s| s.vy), &col(&pred, |s| s.vy))?;
        let errors = gt
            .states()
            .iter()
            .zip(pred.states())
            .map(|(a, b)| ErrorSample {
                t: a.t.to_f64_lossy(),
                position_error: (a.x - b.x).hypot(a.y - b.y).to_f64_lossy(),
                vx_error: (b.vx - a.vx).to_f64_lossy(),
                vy_error: (b.vy - a.vy).to_f64_lossy(),
            })
            .collect();
        Ok(Self {
            ate: ate(&gt, &pred)?.to_f64_lossy(),
            vrmse_x: vrmse_x.to_f64_lossy(),
            vrmse_y: vrmse_y.to_f64_lossy(),
            nvrmse_x: nvrmse(vrmse_x, range.0)?.to_f64_lossy(),
            nvrmse_y: nvrmse(vrmse_y, range.1)?.to_f64_lossy(),
            errors,
        })
    }
}

/// One method's row of the comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: String,
    pub ate: Vec<f64>,
    pub average: f64,
    /// Improvement of the reference method over this one.
    pub improvement: Option<Improvement>,
}

/// Per-trajectory ATE of every method, with averages and the reference
/// method's improvement over each other method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub trajectories: Vec<String>,
    pub reference: String,
    pub rows: Vec<MethodRow>,
}

impl ComparisonTable {
    /// `methods` holds `(name, ATE per trajectory)`; `reference` must be one of them.
    pub fn new(trajectories: Vec<String>, methods: Vec<(String, Vec<f64>)>, reference: &str) -> Result<Self> {
        if trajectories.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if let Some((name, v)) = methods.iter().find(|(_, v)| v.len() != trajectories.len()) {
            return Err(Error::Shape(format!(
                "method {name} has {} entries for {} trajectories",
                v.len(),
                trajectories.len()
            )));
        }
        let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let ours = methods
            .iter()
            .find(|(n, _)| n == reference)
            .map(|(_, v)| avg(v))
            .ok_or_else(|| Error::invalid(format!("reference method {reference} not in table")))?;
        let rows = methods
            .into_iter()
            .map(|(method, ate)| {
                let average = avg(&ate);
                let improvement = if method == reference {
                    None
                } else {
                    Some(improvement_pct(average, ours)?)
                };
                Ok(MethodRow {
                    method,
                    ate,
                    average,
                    improvement,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            trajectories,
            reference: reference.to_string(),
            rows,
        })
    }

    /// Fixed-width text rendering: one row per method.
    pub fn to_text(&self) -> String {
        let name_w = self.rows.iter().map(|r| r.method.len()).chain([6]).max().unwrap_or(6);
        let col_w = self.trajectories.iter().map(String::len).chain([8]).max().unwrap_or(8);
        let mut s = format!("{:<name_w$}", "Method");
        for t in &self.trajectories {
            let _ = write!(s, "  {t:>col_w$}");
        }
        let _ = writeln!(s, "  {:>col_w$}  {:>11}", "Average", "Improvement");
        for r in &self.rows {
            let _ = write!(s, "{:<name_w$}", r.method);
            for a in &r.ate {
                let _ = write!(s, "  {a:>col_w$.3}");
            }
            let imp = r.improvement.map_or("-".to_string(), |i| format!("{}%", i.rounded));
            let _ = writeln!(s, "  {:>col_w$.3}  {imp:>11}", r.average);
        }
        s
    }
}
