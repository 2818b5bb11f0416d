//! Run preparation shared by the baseline, training and evaluation paths:
//! estimate biases over the stationary prefix, drop the prefix, and re-zero
//! the time axes of both streams at the first kept IMU sample.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::strapdown::{zero_order_calibrate, SensorBias};
use crate::types::{time_tolerance, ImuSample, NavState, Trajectory};

#[derive(Clone, Debug, PartialEq)]
pub struct Prepared<T = f64> {
    /// Bias-corrected, trimmed IMU; time starts at 0.
    pub imu: Vec<ImuSample<T>>,
    /// Ground truth on the same time axis.
    pub gt: Trajectory<T>,
    pub bias: SensorBias<T>,
    /// Ground truth at time 0.
    pub initial: NavState<T>,
}

/// Prepares one run. With `calibrate` false the bias is reported as zero and
/// the IMU is only trimmed.
pub fn prepare<T: Scalar>(
    imu: &[ImuSample<T>],
    gt: &Trajectory<T>,
    stationary_s: T,
    calibrate: bool,
) -> Result<Prepared<T>> {
    let first = imu.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    if !(stationary_s >= T::zero()) {
        return Err(Error::invalid("stationary duration must be non-negative"));
    }
    let bias = if calibrate && stationary_s > T::zero() {
        zero_order_calibrate(imu, stationary_s)?
    } else {
        SensorBias::zero()
    };
    let t_start = first.t + stationary_s;
    let tol = time_tolerance(t_start);
    let start = imu
        .iter()
        .position(|s| s.t >= t_start - tol)
        .ok_or(Error::InsufficientData { needed: 2, got: 0 })?;
    let t0 = imu[start].t;
    let kept = bias.remove_from(&imu[start..]);
    if kept.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: kept.len(),
        });
    }
    let initial = gt
        .interpolate(t0)
        .ok_or_else(|| Error::invalid(format!("ground truth does not cover t = {t0}")))?;
    let tol0 = time_tolerance(t0);
    let gt_states: Vec<_> = gt
        .states()
        .iter()
        .filter(|s| s.t >= t0 - tol0)
        .map(|s| NavState { t: s.t - t0, ..*s })
        .collect();
    Ok(Prepared {
        imu: kept.into_iter().map(|s| ImuSample { t: s.t - t0, ..s }).collect(),
        gt: Trajectory::new(gt_states, gt.rate_hz())?,
        bias,
        initial: NavState {
            t: T::zero(),
            ..initial
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run() -> (Vec<ImuSample>, Trajectory) {
        let imu: Vec<_> = (0..1200)
            .map(|k| ImuSample {
                t: 3.0 + k as f64 / 120.0,
                fx: if k < 600 { 0.02 } else { 0.52 },
                fy: -0.01,
                omega_z: 0.003,
            })
            .collect();
        let gt = Trajectory::new(
            (0..100)
                .map(|k| {
                    let t = 3.0 + k as f64 / 10.0;
                    NavState {
                        t,
                        x: t,
                        y: 2.0,
                        vx: 1.0,
                        vy: 0.0,
                        psi: 0.1,
                    }
                })
                .collect(),
            10.0,
        )
        .unwrap();
        (imu, gt)
    }

    #[test]
    fn removes_prefix_bias_and_rezeroes() {
        let (imu, gt) = run();
        let p = prepare(&imu, &gt, 5.0, true).unwrap();
        assert_eq!(p.imu.len(), 600);
        assert_eq!(p.imu[0].t, 0.0);
        assert!((p.imu[0].fx - 0.5).abs() < 1e-12);
        assert!(p.imu[0].fy.abs() < 1e-12 && p.imu[0].omega_z.abs() < 1e-12);
        assert_eq!(p.gt.first().unwrap().t, 0.0);
        assert_eq!(p.gt.len(), 50);
        assert!((p.initial.x - 8.0).abs() < 1e-12);
        assert_eq!(p.initial.t, 0.0);
    }

    #[test]
    fn without_calibration_only_trims() {
        let (imu, gt) = run();
        let p = prepare(&imu, &gt, 5.0, false).unwrap();
        assert_eq!(p.bias, SensorBias::zero());
        assert_eq!(p.imu[0].fx, 0.52);
    }

    #[test]
    fn zero_prefix_keeps_everything() {
        let (imu, gt) = run();
        let p = prepare(&imu, &gt, 0.0, true).unwrap();
        assert_eq!(p.imu.len(), imu.len());
        assert_eq!(p.imu[5].fx, imu[5].fx);
    }

    #[test]
    fn prefix_longer_than_stream_is_rejected() {
        let (imu, gt) = run();
        assert!(prepare(&imu, &gt, 50.0, true).is_err());
    }
}
