use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::strapdown::RotationYaw;
use crate::types::{wrap_angle, ImuSample, NavState, Trajectory};
use crate::window::{make_windows, Window};

use super::loss::{Input, State};

/// Physics-only points: times across the training time domain, sensor values
/// across the observed per-channel ranges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollocationSet<T = f64> {
    pub points: Vec<Input<T>>,
}

impl<T> CollocationSet<T> {
    pub fn n_phys(&self) -> usize {
        self.points.len()
    }
}

/// Per-channel `[min, max]` of a set of inputs.
pub fn input_bounds<T: Scalar>(inputs: &[Input<T>]) -> Result<[(T, T); 4]> {
    if inputs.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut b = [(T::infinity(), T::neg_infinity()); 4];
    for u in inputs {
        for (bj, &v) in b.iter_mut().zip(u) {
            *bj = (bj.0.min(v), bj.1.max(v));
        }
    }
    Ok(b)
}

/// Draws `n_phys` points, each channel independently uniform over its
/// observed training range. Deterministic per seed.
pub fn sample_collocation<T: Scalar>(train_inputs: &[Input<T>], n_phys: usize, seed: u64) -> Result<CollocationSet<T>> {
    let bounds = input_bounds(train_inputs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n_phys)
        .map(|_| {
            bounds.map(|(lo, hi)| {
                let u: f64 = rng.random();
                // lo + u·(hi − lo) can round past hi
                (lo + T::lit(u) * (hi - lo)).min(hi)
            })
        })
        .collect();
    Ok(CollocationSet { points })
}

/// `n_ic` copies of the first training input with the position it must map to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitSet<T = f64> {
    pub points: Vec<Input<T>>,
    pub target: [T; 2],
}

impl<T: Scalar> InitSet<T> {
    pub fn repeat(first_input: Input<T>, n_ic: usize, target: [T; 2]) -> Self {
        Self {
            points: vec![first_input; n_ic],
            target,
        }
    }

    pub fn n_ic(&self) -> usize {
        self.points.len()
    }
}

/// Supervised samples grouped by window: rows `[k·W, (k+1)·W)` belong to
/// window `k`. Inputs carry time since the window start; targets are in the
/// anchor frame (position relative to the anchor, rotated by −ψ_anchor).
#[derive(Clone, Debug, PartialEq)]
pub struct SupervisedSet<T = f64> {
    pub window_len: usize,
    pub inputs: Vec<Input<T>>,
    pub targets: Vec<State<T>>,
}

/// Expresses `state` in the frame of `anchor`.
pub fn to_anchor_frame<T: Scalar>(anchor: &NavState<T>, state: &NavState<T>) -> State<T> {
    let r = RotationYaw::new(anchor.psi);
    let (x, y) = r.apply_transpose((state.x - anchor.x, state.y - anchor.y));
    let (vx, vy) = r.apply_transpose((state.vx, state.vy));
    [x, y, vx, vy, wrap_angle(state.psi - anchor.psi)]
}

/// Inverse of [`to_anchor_frame`].
pub fn from_anchor_frame<T: Scalar>(anchor_pos: (T, T), anchor_psi: T, t: T, rel: &State<T>) -> NavState<T> {
    let r = RotationYaw::new(anchor_psi);
    let (dx, dy) = r.apply((rel[0], rel[1]));
    let (vx, vy) = r.apply((rel[2], rel[3]));
    NavState {
        t,
        x: anchor_pos.0 + dx,
        y: anchor_pos.1 + dy,
        vx,
        vy,
        psi: wrap_angle(anchor_psi + rel[4]),
    }
}

impl<T: Scalar> SupervisedSet<T> {
    /// Targets come from `gt` interpolated at every sample time.
    pub fn from_windows(windows: &[Window<'_, T>], gt: &Trajectory<T>) -> Result<Self> {
        let window_len = windows.first().map_or(0, Window::len);
        if let Some(w) = windows.iter().find(|w| w.len() != window_len) {
            return Err(Error::Shape(format!(
                "window at sample {} has {} samples, expected {window_len}",
                w.start,
                w.len()
            )));
        }
        let mut inputs = Vec::with_capacity(windows.len() * window_len);
        let mut targets = Vec::with_capacity(windows.len() * window_len);
        for w in windows {
            let t0 = w.samples[0].t;
            for s in w.samples {
                let truth = gt
                    .interpolate(s.t)
                    .ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
                inputs.push([s.t - t0, s.fx, s.fy, s.omega_z]);
                targets.push(to_anchor_frame(&w.anchor_state, &truth));
            }
        }
        Ok(Self {
            window_len,
            inputs,
            targets,
        })
    }

    pub fn num_windows(&self) -> usize {
        self.inputs.len().checked_div(self.window_len).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn window_rows(&self, k: usize) -> std::ops::Range<usize> {
        k * self.window_len..(k + 1) * self.window_len
    }
}

/// Splits time-ordered windows into training and validation parts: the last
/// `val_fraction` of windows validate, and training windows overlapping the
/// first validation window are dropped.
pub fn split_validation<'a, 'b, T>(
    windows: &'b [Window<'a, T>],
    val_fraction: f64,
) -> Result<(&'b [Window<'a, T>], &'b [Window<'a, T>])> {
    if !(0.0..1.0).contains(&val_fraction) {
        return Err(Error::Config(format!(
            "validation fraction {val_fraction} outside [0, 1)"
        )));
    }
    let n_val = (windows.len() as f64 * val_fraction).ceil() as usize;
    if n_val == 0 {
        return Ok((windows, &windows[windows.len()..]));
    }
    let first_val = windows.len() - n_val;
    let boundary = windows[first_val].start;
    let n_train = windows[..first_val]
        .iter()
        .take_while(|w| w.start + w.len() <= boundary)
        .count();
    if n_train == 0 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: windows.len(),
        });
    }
    Ok((&windows[..n_train], &windows[first_val..]))
}

/// Windows `imu` per the configuration, splits off the validation tail and
/// builds both supervised sets against `gt`.
pub fn build_datasets<T: Scalar>(
    imu: &[ImuSample<T>],
    gt: &Trajectory<T>,
    window_len: usize,
    stride: usize,
    val_fraction: f64,
) -> Result<(SupervisedSet<T>, SupervisedSet<T>)> {
    let windows = make_windows(imu, gt, window_len, stride)?;
    let (train, val) = split_validation(&windows, val_fraction)?;
    let val = if val.is_empty() {
        SupervisedSet {
            window_len,
            inputs: Vec::new(),
            targets: Vec::new(),
        }
    } else {
        SupervisedSet::from_windows(val, gt)?
    };
    Ok((SupervisedSet::from_windows(train, gt)?, val))
}
