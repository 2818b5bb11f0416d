//! Domain values shared by every module: inertial samples, navigation states,
//! uniformly sampled trajectories, and the sensor error specification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};
use crate::units;

/// One planar inertial measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImuSample<T = f64> {
    /// Time, s.
    pub t: T,
    /// Specific force along body x, m/s².
    pub fx: T,
    /// Specific force along body y, m/s².
    pub fy: T,
    /// Angular rate about body z, rad/s.
    pub omega_z: T,
}

impl<T: Scalar> ImuSample<T> {
    pub fn new(t: T, fx: T, fy: T, omega_z: T) -> Result<Self> {
        let s = Self { t, fx, fy, omega_z };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() || self.t < T::zero() {
            return Err(Error::invalid(format!(
                "IMU timestamp must be finite and non-negative, got {}",
                self.t
            )));
        }
        if !(self.fx.is_finite() && self.fy.is_finite() && self.omega_z.is_finite()) {
            return Err(Error::NonFinite {
                what: "IMU sample",
                layer: None,
            });
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> ImuSample<U> {
        ImuSample {
            t: cast(self.t),
            fx: cast(self.fx),
            fy: cast(self.fy),
            omega_z: cast(self.omega_z),
        }
    }
}

/// Planar navigation state. `psi` is kept unwrapped; use [`wrap_angle`] for display.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NavState<T = f64> {
    pub t: T,
    /// North position, m.
    pub x: T,
    /// East position, m.
    pub y: T,
    pub vx: T,
    pub vy: T,
    /// Yaw, rad.
    pub psi: T,
}

impl<T: Scalar> NavState<T> {
    pub fn at_rest(t: T, x: T, y: T, psi: T) -> Self {
        Self {
            t,
            x,
            y,
            vx: T::zero(),
            vy: T::zero(),
            psi,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.x, self.y, self.vx, self.vy, self.psi]
            .iter()
            .all(|v| v.is_finite())
    }

    pub fn position(&self) -> (T, T) {
        (self.x, self.y)
    }

    pub fn velocity(&self) -> (T, T) {
        (self.vx, self.vy)
    }

    pub fn speed(&self) -> T {
        self.vx.hypot(self.vy)
    }

    pub fn cast<U: Scalar>(&self) -> NavState<U> {
        NavState {
            t: cast(self.t),
            x: cast(self.x),
            y: cast(self.y),
            vx: cast(self.vx),
            vy: cast(self.vy),
            psi: cast(self.psi),
        }
    }

    fn lerp(&self, other: &Self, t: T) -> Self {
        let span = other.t - self.t;
        let w = if span > T::zero() {
            (t - self.t) / span
        } else {
            T::zero()
        };
        let mix = |a: T, b: T| a + (b - a) * w;
        Self {
            t,
            x: mix(self.x, other.x),
            y: mix(self.y, other.y),
            vx: mix(self.vx, other.vx),
            vy: mix(self.vy, other.vy),
            psi: mix(self.psi, other.psi),
        }
    }
}

/// Wraps an angle to (−π, π].
pub fn wrap_angle<T: Scalar>(a: T) -> T {
    let pi = T::lit(std::f64::consts::PI);
    let two_pi = pi + pi;
    let mut w = a - two_pi * ((a + pi) / two_pi).floor();
    // the floor maps exact odd multiples of π to −π
    if w <= -pi {
        w = w + two_pi;
    }
    w
}

/// Tolerance used when checking that timestamps sit on a uniform grid.
pub(crate) fn time_tolerance<T: Scalar>(t_max: T) -> T {
    let eps_based = T::epsilon() * t_max.abs().max(T::one()) * T::lit(64.0);
    eps_based.max(T::lit(1e-9))
}

/// Time-ordered, uniformly sampled sequence of navigation states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T = f64> {
    states: Vec<NavState<T>>,
    rate_hz: T,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(states: Vec<NavState<T>>, rate_hz: T) -> Result<Self> {
        if !(rate_hz.is_finite() && rate_hz > T::zero()) {
            return Err(Error::invalid(format!("sample rate must be positive, got {rate_hz}")));
        }
        check_uniform(states.iter().map(|s| s.t), rate_hz)?;
        if let Some(i) = states.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("non-finite navigation state at index {i}")));
        }
        Ok(Self { states, rate_hz })
    }

    /// Infers the rate from the first interval. Needs at least two states.
    pub fn from_states(states: Vec<NavState<T>>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: states.len(),
            });
        }
        let dt = states[1].t - states[0].t;
        if dt <= T::zero() {
            return Err(Error::invalid("timestamps must be strictly increasing"));
        }
        let rate = (T::one() / dt * T::lit(1e6)).round() / T::lit(1e6);
        Self::new(states, rate)
    }

    pub fn states(&self) -> &[NavState<T>] {
        &self.states
    }

    pub fn into_states(self) -> Vec<NavState<T>> {
        self.states
    }

    pub fn rate_hz(&self) -> T {
        self.rate_hz
    }

    pub fn dt(&self) -> T {
        T::one() / self.rate_hz
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> Option<&NavState<T>> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&NavState<T>> {
        self.states.last()
    }

    pub fn timestamps(&self) -> impl Iterator<Item = T> + '_ {
        self.states.iter().map(|s| s.t)
    }

    /// Linear interpolation of every field at time `t`. Times outside the
    /// covered span are clamped to the end states.
    pub fn interpolate(&self, t: T) -> Option<NavState<T>> {
        let first = self.states.first()?;
        let last = self.states.last()?;
        if t <= first.t {
            return Some(NavState { t, ..*first });
        }
        if t >= last.t {
            return Some(NavState { t, ..*last });
        }
        let pos = ((t - first.t) * self.rate_hz).floor().to_usize().unwrap_or(0);
        let i = pos.min(self.states.len() - 2);
        Some(self.states[i].lerp(&self.states[i + 1], t))
    }

    /// Resamples onto the given timestamps (linear interpolation).
    pub fn resample(&self, timestamps: &[T], rate_hz: T) -> Result<Self> {
        let states = timestamps
            .iter()
            .map(|&t| self.interpolate(t))
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
        Self::new(states, rate_hz)
    }

    /// Drops states before `t_start` and shifts time so the first kept state is at 0.
    pub fn trim_and_rezero(&self, t_start: T) -> Result<Self> {
        let tol = time_tolerance(t_start);
        let kept: Vec<_> = self.states.iter().filter(|s| s.t >= t_start - tol).copied().collect();
        let t0 = kept.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?.t;
        let states = kept.into_iter().map(|s| NavState { t: s.t - t0, ..s }).collect();
        Self::new(states, self.rate_hz)
    }

    /// Path length by summing chord lengths.
    pub fn path_length(&self) -> T {
        self.states
            .windows(2)
            .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
            .sum()
    }

    pub fn duration(&self) -> T {
        match (self.states.first(), self.states.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => T::zero(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> Trajectory<U> {
        Trajectory {
            states: self.states.iter().map(NavState::cast).collect(),
            rate_hz: cast(self.rate_hz),
        }
    }
}

/// Checks strict monotonicity and uniform spacing of `1/rate_hz`.
pub(crate) fn check_uniform<T: Scalar>(times: impl Iterator<Item = T>, rate_hz: T) -> Result<()> {
    let expected = T::one() / rate_hz;
    let mut prev: Option<T> = None;
    for (i, t) in times.enumerate() {
        if let Some(p) = prev {
            let dt = t - p;
            if dt <= T::zero() || (dt - expected).abs() > time_tolerance(t) {
                return Err(Error::NonUniformSampling {
                    index: i,
                    interval: dt.to_f64_lossy(),
                    expected: expected.to_f64_lossy(),
                });
            }
        }
        prev = Some(t);
    }
    Ok(())
}

/// Checks that IMU samples are uniformly spaced and returns the interval.
pub fn uniform_interval<T: Scalar>(imu: &[ImuSample<T>]) -> Result<T> {
    match imu {
        [] => Err(Error::InsufficientData { needed: 1, got: 0 }),
        [_] => Err(Error::InsufficientData { needed: 2, got: 1 }),
        [a, b, ..] => {
            let dt = b.t - a.t;
            if dt <= T::zero() {
                return Err(Error::NonUniformSampling {
                    index: 1,
                    interval: dt.to_f64_lossy(),
                    expected: f64::NAN,
                });
            }
            check_uniform(imu.iter().map(|s| s.t), T::one() / dt)?;
            Ok(dt)
        }
    }
}

/// Trims IMU samples before `t_start` and re-zeroes the time axis.
pub fn trim_imu<T: Scalar>(imu: &[ImuSample<T>], t_start: T) -> Vec<ImuSample<T>> {
    let tol = time_tolerance(t_start);
    let kept: Vec<_> = imu.iter().filter(|s| s.t >= t_start - tol).copied().collect();
    let t0 = kept.first().map(|s| s.t).unwrap_or_else(T::zero);
    kept.into_iter().map(|s| ImuSample { t: s.t - t0, ..s }).collect()
}

/// Sensor error magnitudes for a constant-bias plus white-noise model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImuErrorSpec {
    /// rad/s
    pub gyro_bias: f64,
    /// m/s²
    pub accel_bias: f64,
    /// rad/s/√Hz
    pub gyro_noise_density: f64,
    /// m/s²/√Hz
    pub accel_noise_density: f64,
    pub sample_rate_hz: f64,
    pub seed: u64,
}

impl ImuErrorSpec {
    /// Datasheet values of the Movella DOT IMU: gyro bias 10 °/h, accel bias
    /// 0.03 mg, gyro noise 0.007 °/s/√Hz, accel noise 120 µg/√Hz.
    pub fn movella_dot(sample_rate_hz: f64, seed: u64) -> Self {
        Self {
            gyro_bias: units::deg_per_hour_to_rad_per_s(10.0),
            accel_bias: units::milli_g_to_mps2(0.03),
            gyro_noise_density: 0.007_f64.to_radians(),
            accel_noise_density: units::milli_g_to_mps2(120e-3),
            sample_rate_hz,
            seed,
        }
    }

    pub fn zero(sample_rate_hz: f64, seed: u64) -> Self {
        Self {
            gyro_bias: 0.0,
            accel_bias: 0.0,
            gyro_noise_density: 0.0,
            accel_noise_density: 0.0,
            sample_rate_hz,
            seed,
        }
    }

    /// Multiplies every error magnitude by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            gyro_bias: self.gyro_bias * factor,
            accel_bias: self.accel_bias * factor,
            gyro_noise_density: self.gyro_noise_density * factor,
            accel_noise_density: self.accel_noise_density * factor,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mags = [
            ("gyro_bias", self.gyro_bias),
            ("accel_bias", self.accel_bias),
            ("gyro_noise_density", self.gyro_noise_density),
            ("accel_noise_density", self.accel_noise_density),
        ];
        for (name, v) in mags {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::invalid("sample_rate_hz must be positive"));
        }
        Ok(())
    }

    /// Per-sample white-noise standard deviation of the gyro, rad/s.
    pub fn gyro_sigma(&self) -> f64 {
        units::noise_sigma_per_sample(self.gyro_noise_density, self.sample_rate_hz)
    }

    /// Per-sample white-noise standard deviation of the accelerometer, m/s².
    pub fn accel_sigma(&self) -> f64 {
        units::noise_sigma_per_sample(self.accel_noise_density, self.sample_rate_hz)
    }
}
