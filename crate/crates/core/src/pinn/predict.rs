use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::strapdown::RotationYaw;
use crate::types::{uniform_interval, wrap_angle, ImuSample, NavState, Trajectory};

use super::config::HeadingSource;
use super::data::from_anchor_frame;
use super::loss::{Input, StateModel};
use super::model::{PinnModel, EXTRAPOLATION_Z};

/// Where each window's anchor comes from.
#[derive(Clone, Copy, Debug)]
pub enum Anchoring<'a, T> {
    /// Previous window's predicted end state (pure inertial).
    Chained,
    /// Ground truth at every window start.
    Truth(&'a Trajectory<T>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictOptions {
    pub heading: HeadingSource,
    /// Below this predicted speed, m/s, the heading is carried unchanged.
    pub min_heading_speed: f64,
}

impl Default for PredictOptions {
    fn default() -> Self {
        Self {
            heading: HeadingSource::Integrated,
            min_heading_speed: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction<T> {
    pub trajectory: Trajectory<T>,
    /// Some normalized input exceeded the extrapolation threshold.
    pub extrapolated: bool,
    pub max_abs_z: f64,
}

/// Runs the model over consecutive windows that share their boundary sample
/// (hop `window_len − 1`) and maps every window's anchor-frame output back to
/// the navigation frame. The first anchor is `t0_state`.
pub fn predict_trajectory<T: Scalar>(
    model: &PinnModel<T>,
    imu: &[ImuSample<T>],
    t0_state: &NavState<T>,
    anchoring: Anchoring<'_, T>,
    options: PredictOptions,
) -> Result<Prediction<T>> {
    model.validate()?;
    let dt = uniform_interval(imu)?;
    if !t0_state.is_finite() {
        return Err(Error::invalid("initial state is not finite"));
    }
    let w = model.window_len;
    let hop = w - 1;
    let n = imu.len();
    let min_speed = T::lit(options.min_heading_speed);

    let mut pos = (t0_state.x, t0_state.y);
    let mut psi = t0_state.psi;
    let mut states = Vec::with_capacity(n);
    let mut max_z = T::zero();
    let mut s = 0;
    while s < n {
        let end = (s + w).min(n);
        if let Anchoring::Truth(gt) = anchoring {
            let a = gt
                .interpolate(imu[s].t)
                .ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
            pos = (a.x, a.y);
            psi = a.psi;
        }
        let t0 = imu[s].t;
        let inputs: Vec<Input<T>> = imu[s..end].iter().map(|u| [u.t - t0, u.fx, u.fy, u.omega_z]).collect();
        let (_, z) = model.normalize_inputs(&inputs);
        max_z = max_z.max(z);
        let rel = model.states(&inputs)?;
        let last_window = end == n;
        let emit = if last_window { rel.len() } else { hop };
        for (j, r) in rel.iter().take(emit).enumerate() {
            states.push(from_anchor_frame(pos, psi, imu[s + j].t, r));
        }
        if last_window {
            break;
        }
        let r = &rel[hop];
        let (dx, dy) = RotationYaw::new(psi).apply((r[0], r[1]));
        let dpsi = match options.heading {
            HeadingSource::Network => r[4] - rel[0][4],
            HeadingSource::Integrated => {
                let half = T::lit(0.5);
                imu[s..=s + hop]
                    .windows(2)
                    .map(|p| half * (p[1].t - p[0].t) * (p[0].omega_z + p[1].omega_z))
                    .sum()
            }
            HeadingSource::Velocity => {
                if r[2].hypot(r[3]) >= min_speed {
                    r[3].atan2(r[2])
                } else {
                    T::zero()
                }
            }
        };
        pos = (pos.0 + dx, pos.1 + dy);
        psi = wrap_angle(psi + dpsi);
        s += hop;
    }
    Ok(Prediction {
        trajectory: Trajectory::new(states, dt.recip())?,
        extrapolated: max_z > T::lit(EXTRAPOLATION_Z),
        max_abs_z: max_z.to_f64_lossy(),
    })
}
