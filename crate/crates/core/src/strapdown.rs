//! Planar strapdown mechanization, zero-order calibration, and
//! distance-plus-heading dead reckoning.
//!
//! With roll and pitch negligible the body-to-navigation rotation depends
//! only on yaw, the vertical specific force drops out of the horizontal
//! equations, and only the z gyro is kept:
//!
//! ```text
//! ṗ = v
//! v̇ = C(ψ)·f + g
//! ψ̇ = ω_z
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{time_tolerance, uniform_interval, ImuSample, NavState, Trajectory};

/// Yaw-only body-to-navigation rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationYaw<T = f64> {
    pub psi: T,
}

impl<T: Scalar> RotationYaw<T> {
    pub fn new(psi: T) -> Self {
        Self { psi }
    }

    /// Row-major `[[cos ψ, −sin ψ], [sin ψ, cos ψ]]`.
    pub fn matrix(&self) -> [[T; 2]; 2] {
        let (s, c) = self.psi.sin_cos();
        [[c, -s], [s, c]]
    }

    /// Body to navigation.
    pub fn apply(&self, v: (T, T)) -> (T, T) {
        let (s, c) = self.psi.sin_cos();
        (c * v.0 - s * v.1, s * v.0 + c * v.1)
    }

    /// Navigation to body.
    pub fn apply_transpose(&self, v: (T, T)) -> (T, T) {
        let (s, c) = self.psi.sin_cos();
        (c * v.0 + s * v.1, -s * v.0 + c * v.1)
    }
}

/// Horizontal components of the (constant) navigation-frame gravity vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GravityPlanar<T = f64> {
    pub gx: T,
    pub gy: T,
}

impl<T: Scalar> GravityPlanar<T> {
    pub fn level() -> Self {
        Self {
            gx: T::zero(),
            gy: T::zero(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> GravityPlanar<U> {
        GravityPlanar {
            gx: crate::scalar::cast(self.gx),
            gy: crate::scalar::cast(self.gy),
        }
    }
}

pub fn rotate_body_to_nav<T: Scalar>(psi: T, f_body: (T, T)) -> (T, T) {
    RotationYaw::new(psi).apply(f_body)
}

/// Integration scheme used by [`mechanize`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Trapezoidal heading, force rotated at the mid-step heading, trapezoidal position.
    #[default]
    Trapezoidal,
    /// Forward Euler on every state.
    Rectangular,
}

/// Dead-reckons the full IMU stream from `initial` with no aiding.
pub fn mechanize<T: Scalar>(
    initial: &NavState<T>,
    imu: &[ImuSample<T>],
    gravity: &GravityPlanar<T>,
    scheme: Scheme,
) -> Result<Trajectory<T>> {
    let first = imu.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    if (initial.t - first.t).abs() > time_tolerance(first.t) {
        return Err(Error::invalid(format!(
            "initial state time {} does not match first IMU sample {}",
            initial.t, first.t
        )));
    }
    if imu.len() == 1 {
        return Trajectory::new(vec![*initial], T::one());
    }
    let dt = uniform_interval(imu)?;
    let half = T::lit(0.5);

    let mut states = Vec::with_capacity(imu.len());
    let mut s = NavState { t: first.t, ..*initial };
    states.push(s);
    for pair in imu.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let next = match scheme {
            Scheme::Trapezoidal => {
                let psi = s.psi + half * dt * (a.omega_z + b.omega_z);
                let mid = half * (s.psi + psi);
                let f = (half * (a.fx + b.fx), half * (a.fy + b.fy));
                let (ax, ay) = RotationYaw::new(mid).apply(f);
                let vx = s.vx + dt * (ax + gravity.gx);
                let vy = s.vy + dt * (ay + gravity.gy);
                NavState {
                    t: b.t,
                    x: s.x + half * dt * (s.vx + vx),
                    y: s.y + half * dt * (s.vy + vy),
                    vx,
                    vy,
                    psi,
                }
            }
            Scheme::Rectangular => {
                let (ax, ay) = RotationYaw::new(s.psi).apply((a.fx, a.fy));
                NavState {
                    t: b.t,
                    x: s.x + dt * s.vx,
                    y: s.y + dt * s.vy,
                    vx: s.vx + dt * (ax + gravity.gx),
                    vy: s.vy + dt * (ay + gravity.gy),
                    psi: s.psi + dt * a.omega_z,
                }
            }
        };
        states.push(next);
        s = next;
    }
    Trajectory::new(states, T::one() / dt)
}

/// Constant sensor biases estimated over a stationary interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SensorBias<T = f64> {
    pub fx: T,
    pub fy: T,
    pub omega_z: T,
}

impl<T: Scalar> SensorBias<T> {
    pub fn zero() -> Self {
        Self {
            fx: T::zero(),
            fy: T::zero(),
            omega_z: T::zero(),
        }
    }

    pub fn remove_from(&self, imu: &[ImuSample<T>]) -> Vec<ImuSample<T>> {
        imu.iter()
            .map(|s| ImuSample {
                t: s.t,
                fx: s.fx - self.fx,
                fy: s.fy - self.fy,
                omega_z: s.omega_z - self.omega_z,
            })
            .collect()
    }
}

/// Per-channel mean over the first `stationary_duration_s` seconds. Level
/// ground is assumed, so the in-plane specific force should read zero at rest.
pub fn zero_order_calibrate<T: Scalar>(imu: &[ImuSample<T>], stationary_duration_s: T) -> Result<SensorBias<T>> {
    let first = imu.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    if !(stationary_duration_s > T::zero()) {
        return Err(Error::invalid("stationary duration must be positive"));
    }
    let last = imu.last().map(|s| s.t).unwrap_or(first.t);
    if last - first.t + time_tolerance(last) < stationary_duration_s {
        return Err(Error::invalid(format!(
            "requested {} s of stationary data but the stream covers {} s",
            stationary_duration_s,
            last - first.t
        )));
    }
    let cutoff = first.t + stationary_duration_s - time_tolerance(last);
    let prefix: Vec<_> = imu.iter().take_while(|s| s.t < cutoff).collect();
    if prefix.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let n = T::from_usize(prefix.len()).unwrap();
    Ok(SensorBias {
        fx: prefix.iter().map(|s| s.fx).sum::<T>() / n,
        fy: prefix.iter().map(|s| s.fy).sum::<T>() / n,
        omega_z: prefix.iter().map(|s| s.omega_z).sum::<T>() / n,
    })
}

/// One distance-plus-heading position step.
pub fn dead_reckon_update<T: Scalar>(pos: (T, T), distance: T, psi: T) -> (T, T) {
    let (s, c) = psi.sin_cos();
    (pos.0 + distance * c, pos.1 + distance * s)
}

/// Heading by trapezoidal integration of the z gyro.
pub fn heading_by_gyro_integration<T: Scalar>(psi0: T, imu: &[ImuSample<T>]) -> Result<Vec<T>> {
    if imu.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if imu.len() == 1 {
        return Ok(vec![psi0]);
    }
    let dt = uniform_interval(imu)?;
    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(imu.len());
    let mut psi = psi0;
    out.push(psi);
    for w in imu.windows(2) {
        psi = psi + half * dt * (w[0].omega_z + w[1].omega_z);
        out.push(psi);
    }
    Ok(out)
}

/// Where per-step travelled distances come from in [`dead_reckon`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceSource {
    /// Chord lengths of the ground truth; isolates heading error.
    Truth,
    /// Speed from strapdown mechanization times the step interval.
    #[default]
    Mechanized,
}

/// Per-step distances: chord lengths between consecutive states.
pub fn distances_from_truth<T: Scalar>(truth_at_imu: &Trajectory<T>) -> Vec<T> {
    truth_at_imu
        .states()
        .windows(2)
        .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
        .collect()
}

/// Per-step distances: trapezoidal speed × dt of a mechanized trajectory.
pub fn distances_from_speed<T: Scalar>(traj: &Trajectory<T>) -> Vec<T> {
    let dt = traj.dt();
    traj.states()
        .windows(2)
        .map(|w| T::lit(0.5) * dt * (w[0].speed() + w[1].speed()))
        .collect()
}

/// Dead reckoning with gyro-integrated heading: `p_{k+1} = p_k + s_k·(cos ψ_k, sin ψ_k)`.
/// `distances` has one entry per step (len = imu.len() − 1).
pub fn dead_reckon<T: Scalar>(initial: &NavState<T>, imu: &[ImuSample<T>], distances: &[T]) -> Result<Trajectory<T>> {
    let headings = heading_by_gyro_integration(initial.psi, imu)?;
    if distances.len() + 1 != imu.len() {
        return Err(Error::Shape(format!(
            "{} distances for {} samples",
            distances.len(),
            imu.len()
        )));
    }
    if imu.len() == 1 {
        return Trajectory::new(
            vec![NavState {
                t: imu[0].t,
                ..*initial
            }],
            T::one(),
        );
    }
    let dt = uniform_interval(imu)?;
    let mut states = Vec::with_capacity(imu.len());
    let mut pos = initial.position();
    states.push(NavState {
        t: imu[0].t,
        ..*initial
    });
    for k in 0..distances.len() {
        let psi = headings[k];
        pos = dead_reckon_update(pos, distances[k], psi);
        let speed = distances[k] / dt;
        let (s, c) = headings[k + 1].sin_cos();
        states.push(NavState {
            t: imu[k + 1].t,
            x: pos.0,
            y: pos.1,
            vx: speed * c,
            vy: speed * s,
            psi: headings[k + 1],
        });
    }
    Trajectory::new(states, T::one() / dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn imu_const(n: usize, rate: f64, fx: f64, fy: f64, wz: f64) -> Vec<ImuSample> {
        (0..n)
            .map(|i| ImuSample {
                t: i as f64 / rate,
                fx,
                fy,
                omega_z: wz,
            })
            .collect()
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(rotate_body_to_nav(0.0, (1.0, 2.0)), (1.0, 2.0));
        let (x, y) = rotate_body_to_nav(FRAC_PI_2, (1.0, 0.0));
        assert!(x.abs() < 1e-15 && (y - 1.0).abs() < 1e-15);
        let (x, y) = rotate_body_to_nav(FRAC_PI_4, (1.0, 0.0));
        assert!((x - y).abs() < 1e-15 && (x * x - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn rotation_is_orthonormal_and_norm_preserving(psi in -20.0f64..20.0, fx in -1e3f64..1e3, fy in -1e3f64..1e3) {
            let m = RotationYaw::new(psi).matrix();
            let c0 = (m[0][0], m[1][0]);
            let c1 = (m[0][1], m[1][1]);
            prop_assert!((c0.0 * c0.0 + c0.1 * c0.1 - 1.0).abs() < 1e-12);
            prop_assert!((c1.0 * c1.0 + c1.1 * c1.1 - 1.0).abs() < 1e-12);
            prop_assert!((c0.0 * c1.0 + c0.1 * c1.1).abs() < 1e-12);
            let (x, y) = rotate_body_to_nav(psi, (fx, fy));
            let n0 = fx.hypot(fy);
            prop_assert!((x.hypot(y) - n0).abs() <= 1e-12 * n0.max(1.0));
            let back = RotationYaw::new(psi).apply_transpose((x, y));
            prop_assert!((back.0 - fx).abs() < 1e-9 && (back.1 - fy).abs() < 1e-9);
        }

        #[test]
        fn closed_polygon_returns_to_start(n in 3usize..12, side in 0.1f64..10.0) {
            let mut p = (0.0, 0.0);
            for k in 0..n {
                p = dead_reckon_update(p, side, 2.0 * PI * k as f64 / n as f64);
            }
            prop_assert!(p.0.abs() < 1e-12 * side * n as f64 + 1e-12);
            prop_assert!(p.1.abs() < 1e-12 * side * n as f64 + 1e-12);
        }

        #[test]
        fn mechanize_is_yaw_equivariant(delta in -3.0f64..3.0, wz in -0.5f64..0.5, fx in -1.0f64..1.0, fy in -1.0f64..1.0) {
            let imu: Vec<_> = (0..240).map(|i| {
                let t = i as f64 / 120.0;
                ImuSample { t, fx: fx * (t).cos(), fy, omega_z: wz * (2.0 * t).sin() }
            }).collect();
            let init = NavState { t: 0.0, x: 1.0, y: -2.0, vx: 0.5, vy: 0.2, psi: 0.3 };
            let base = mechanize(&init, &imu, &GravityPlanar::level(), Scheme::Trapezoidal).unwrap();
            let r = RotationYaw::new(delta);
            let (vx, vy) = r.apply((init.vx, init.vy));
            let (x, y) = r.apply((init.x, init.y));
            let rot_init = NavState { x, y, vx, vy, psi: init.psi + delta, ..init };
            let rotated = mechanize(&rot_init, &imu, &GravityPlanar::level(), Scheme::Trapezoidal).unwrap();
            for (a, b) in base.states().iter().zip(rotated.states()) {
                let (x, y) = r.apply((a.x, a.y));
                prop_assert!((x - b.x).abs() < 1e-9 && (y - b.y).abs() < 1e-9);
                prop_assert!((a.psi + delta - b.psi).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stationary_input_stays_put() {
        let imu = imu_const(500, 120.0, 0.0, 0.0, 0.0);
        let init = NavState::at_rest(0.0, 3.0, 4.0, 0.0);
        let traj = mechanize(&init, &imu, &GravityPlanar::level(), Scheme::Trapezoidal).unwrap();
        for s in traj.states() {
            assert_eq!((s.x, s.y, s.vx, s.vy, s.psi), (3.0, 4.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn constant_acceleration_is_exact() {
        let imu = imu_const(1201, 120.0, 1.0, 0.0, 0.0);
        let traj = mechanize(
            &NavState::at_rest(0.0, 0.0, 0.0, 0.0),
            &imu,
            &GravityPlanar::level(),
            Scheme::Trapezoidal,
        )
        .unwrap();
        for s in traj.states() {
            assert!((s.x - s.t * s.t / 2.0).abs() < 1e-9, "t={} x={}", s.t, s.x);
            assert!(s.y.abs() < 1e-15);
        }
    }

    fn circle_error(rate: f64) -> f64 {
        let (v, w, dur) = (1.0, 0.2, 30.0);
        let n = (dur * rate).round() as usize + 1;
        let imu = imu_const(n, rate, 0.0, v * w, w);
        let init = NavState {
            t: 0.0,
            x: 0.0,
            y: 0.0,
            vx: v,
            vy: 0.0,
            psi: 0.0,
        };
        let traj = mechanize(&init, &imu, &GravityPlanar::level(), Scheme::Trapezoidal).unwrap();
        let r = v / w;
        traj.states()
            .iter()
            .map(|s| {
                let (sx, sy) = (r * (w * s.t).sin(), r * (1.0 - (w * s.t).cos()));
                (s.x - sx).hypot(s.y - sy)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn coordinated_circle_matches_analytic_path() {
        let e120 = circle_error(120.0);
        assert!(e120 < 1e-3, "error {e120}");
        let e240 = circle_error(240.0);
        assert!(e120 / e240 > 3.5, "ratio {}", e120 / e240);
    }

    #[test]
    fn rectangular_scheme_is_first_order() {
        let imu = imu_const(1201, 120.0, 1.0, 0.0, 0.0);
        let traj = mechanize(
            &NavState::at_rest(0.0, 0.0, 0.0, 0.0),
            &imu,
            &GravityPlanar::level(),
            Scheme::Rectangular,
        )
        .unwrap();
        let last = traj.last().unwrap();
        let err = (last.x - last.t * last.t / 2.0).abs();
        // forward Euler lags by t·dt/2
        assert!((err - 10.0 / 240.0).abs() < 1e-9, "{err}");
    }

    #[test]
    fn mechanize_rejects_bad_input() {
        let init = NavState::at_rest(0.0, 0.0, 0.0, 0.0);
        assert!(mechanize::<f64>(&init, &[], &GravityPlanar::level(), Scheme::Trapezoidal).is_err());
        let mut imu = imu_const(10, 120.0, 0.0, 0.0, 0.0);
        imu[4].t += 1e-3;
        assert!(matches!(
            mechanize(&init, &imu, &GravityPlanar::level(), Scheme::Trapezoidal),
            Err(Error::NonUniformSampling { .. })
        ));
    }

    #[test]
    fn calibration_of_constant_signal() {
        let imu = imu_const(600, 120.0, 0.1, -0.2, 0.05);
        let b = zero_order_calibrate(&imu, 2.0).unwrap();
        assert!((b.fx - 0.1).abs() < 1e-15);
        assert!((b.fy + 0.2).abs() < 1e-15);
        assert!((b.omega_z - 0.05).abs() < 1e-15);
        let fixed = b.remove_from(&imu);
        assert!(fixed.iter().all(|s| s.fx.abs() < 1e-15 && s.omega_z.abs() < 1e-15));
    }

    #[test]
    fn calibration_of_white_noise_is_within_standard_error() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let normal = Normal::new(0.0, 0.01).unwrap();
        // 10 001 samples so that exactly 10 000 fall in the first 100 s
        let imu: Vec<_> = (0..10_001)
            .map(|i| ImuSample {
                t: i as f64 / 100.0,
                fx: normal.sample(&mut rng),
                fy: normal.sample(&mut rng),
                omega_z: normal.sample(&mut rng),
            })
            .collect();
        let b = zero_order_calibrate(&imu, 100.0).unwrap();
        for v in [b.fx, b.fy, b.omega_z] {
            assert!(v.abs() < 3e-4, "{v}");
        }
    }

    #[test]
    fn calibration_errors() {
        let imu = imu_const(120, 120.0, 0.0, 0.0, 0.0);
        assert!(zero_order_calibrate(&imu, 0.0).is_err());
        assert!(zero_order_calibrate(&imu, 5.0).is_err());
        assert!(zero_order_calibrate::<f64>(&[], 1.0).is_err());
    }

    #[test]
    fn dead_reckon_examples() {
        assert_eq!(dead_reckon_update((0.0, 0.0), 1.0, 0.0), (1.0, 0.0));
        let p = dead_reckon_update((0.0, 0.0), 1.0, FRAC_PI_2);
        assert!(p.0.abs() < 1e-15 && (p.1 - 1.0).abs() < 1e-15);
        let p = dead_reckon_update((1.0, 1.0), 2f64.sqrt(), FRAC_PI_4);
        assert!((p.0 - 2.0).abs() < 1e-15 && (p.1 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gyro_heading_examples() {
        let h = heading_by_gyro_integration(0.3, &imu_const(100, 120.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(h.iter().all(|&p| p == 0.3));

        let h = heading_by_gyro_integration(0.3, &imu_const(1201, 120.0, 0.0, 0.0, 0.1)).unwrap();
        assert!((h.last().unwrap() - 1.3).abs() < 1e-12);

        let n = (PI * 1000.0).round() as usize;
        let rate = n as f64 / PI;
        let imu: Vec<_> = (0..=n)
            .map(|i| {
                let t = i as f64 / rate;
                ImuSample {
                    t,
                    fx: 0.0,
                    fy: 0.0,
                    omega_z: t.sin(),
                }
            })
            .collect();
        let h = heading_by_gyro_integration(0.0, &imu).unwrap();
        assert!((h.last().unwrap() - 2.0).abs() < 1e-5);
        assert!(heading_by_gyro_integration::<f64>(0.0, &[]).is_err());
    }

    #[test]
    fn dead_reckon_with_truth_distances_on_a_straight_line() {
        let imu = imu_const(121, 120.0, 0.0, 0.0, 0.0);
        let init = NavState {
            t: 0.0,
            x: 0.0,
            y: 0.0,
            vx: 1.0,
            vy: 0.0,
            psi: 0.0,
        };
        let dist = vec![1.0 / 120.0; 120];
        let traj = dead_reckon(&init, &imu, &dist).unwrap();
        let last = traj.last().unwrap();
        assert!((last.x - 1.0).abs() < 1e-12 && last.y.abs() < 1e-15);
        assert!(dead_reckon(&init, &imu, &dist[1..]).is_err());
    }
}
