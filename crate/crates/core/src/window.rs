//! Segmentation of an IMU stream into overlapping fixed-length windows.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{time_tolerance, ImuSample, NavState, Trajectory};

/// A contiguous run of IMU samples with the ground-truth state at its first timestamp.
#[derive(Clone, Debug, PartialEq)]
pub struct Window<'a, T = f64> {
    pub samples: &'a [ImuSample<T>],
    pub anchor_state: NavState<T>,
    /// Index of the first sample in the source stream.
    pub start: usize,
}

impl<T> Window<'_, T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Number of full windows of `window_len` with the given stride in `n` samples.
pub fn window_count(n: usize, window_len: usize, stride: usize) -> usize {
    if n < window_len || stride == 0 {
        0
    } else {
        (n - window_len) / stride + 1
    }
}

/// Splits `imu` into windows starting at 0, stride, 2·stride, …; a trailing
/// partial window is dropped. Anchors are ground truth interpolated at each
/// window start. Every GT timestamp inside the IMU span must coincide with an
/// IMU timestamp.
pub fn make_windows<'a, T: Scalar>(
    imu: &'a [ImuSample<T>],
    gt: &Trajectory<T>,
    window_len: usize,
    stride: usize,
) -> Result<Vec<Window<'a, T>>> {
    if window_len < 2 {
        return Err(Error::invalid(format!(
            "window_len must be at least 2, got {window_len}"
        )));
    }
    if stride == 0 {
        return Err(Error::invalid("stride must be at least 1"));
    }
    if imu.len() < window_len {
        return Err(Error::InsufficientData {
            needed: window_len,
            got: imu.len(),
        });
    }
    check_alignment(imu, gt)?;

    let count = window_count(imu.len(), window_len, stride);
    (0..count)
        .map(|k| {
            let start = k * stride;
            let samples = &imu[start..start + window_len];
            let anchor_state = gt
                .interpolate(samples[0].t)
                .ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
            Ok(Window {
                samples,
                anchor_state,
                start,
            })
        })
        .collect()
}

fn check_alignment<T: Scalar>(imu: &[ImuSample<T>], gt: &Trajectory<T>) -> Result<()> {
    let (Some(first), Some(last)) = (imu.first(), imu.last()) else {
        return Ok(());
    };
    if gt.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let dt = imu.get(1).map(|s| s.t - first.t).unwrap_or_else(T::one);
    for (i, s) in gt.states().iter().enumerate() {
        if s.t < first.t - time_tolerance(s.t) || s.t > last.t + time_tolerance(s.t) {
            continue;
        }
        let k = ((s.t - first.t) / dt).round();
        let idx = k.to_usize().unwrap_or(usize::MAX);
        let hit = imu
            .get(idx)
            .map(|m| (m.t - s.t).abs() <= time_tolerance(s.t) * T::lit(10.0))
            .unwrap_or(false);
        if !hit {
            return Err(Error::invalid(format!(
                "ground-truth timestamp {} (row {i}) does not coincide with an IMU timestamp",
                s.t
            )));
        }
    }
    Ok(())
}
