use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::strapdown::{GravityPlanar, RotationYaw};
use crate::types::{ImuErrorSpec, ImuSample, Trajectory};

use super::profile::MotionProfile;

fn body_force(psi: f64, accel: (f64, f64), gravity: &GravityPlanar) -> (f64, f64) {
    RotationYaw::new(psi).apply_transpose((accel.0 - gravity.gx, accel.1 - gravity.gy))
}

/// Error-free IMU readings implied by a profile, from analytic derivatives.
pub fn ideal_imu_from_profile(profile: &MotionProfile, gravity: &GravityPlanar) -> Result<Vec<ImuSample>> {
    profile.validate()?;
    Ok((0..profile.sample_count())
        .map(|k| {
            let t = profile.sample_time(k);
            let (psi, omega_z) = profile.heading(t);
            let (fx, fy) = body_force(psi, profile.acceleration(t), gravity);
            ImuSample { t, fx, fy, omega_z }
        })
        .collect())
}

/// Error-free IMU readings from a sampled trajectory by central differences
/// (second-order one-sided differences at the ends).
pub fn ideal_imu_from_trajectory(truth: &Trajectory, gravity: &GravityPlanar) -> Result<Vec<ImuSample>> {
    let s = truth.states();
    let n = s.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let dt = truth.dt();
    let diff = |f: &dyn Fn(usize) -> f64, k: usize| -> f64 {
        if k == 0 {
            (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * dt)
        } else if k == n - 1 {
            (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * dt)
        } else {
            (f(k + 1) - f(k - 1)) / (2.0 * dt)
        }
    };
    Ok((0..n)
        .map(|k| {
            let omega_z = diff(&|i| s[i].psi, k);
            let accel = (diff(&|i| s[i].vx, k), diff(&|i| s[i].vy, k));
            let (fx, fy) = body_force(s[k].psi, accel, gravity);
            ImuSample {
                t: s[k].t,
                fx,
                fy,
                omega_z,
            }
        })
        .collect())
}

/// Adds a constant bias and seeded white Gaussian noise to every channel.
/// The same spec (including seed) always yields bit-identical output.
pub fn corrupt(ideal: &[ImuSample], spec: &ImuErrorSpec) -> Result<Vec<ImuSample>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let invalid = |e: rand_distr::NormalError| Error::invalid(e.to_string());
    let accel = Normal::new(0.0, spec.accel_sigma()).map_err(invalid)?;
    let gyro = Normal::new(0.0, spec.gyro_sigma()).map_err(invalid)?;
    Ok(ideal
        .iter()
        .map(|s| {
            let nx = accel.sample(&mut rng);
            let ny = accel.sample(&mut rng);
            let nw = gyro.sample(&mut rng);
            ImuSample {
                t: s.t,
                fx: s.fx + spec.accel_bias + nx,
                fy: s.fy + spec.accel_bias + ny,
                omega_z: s.omega_z + spec.gyro_bias + nw,
            }
        })
        .collect())
}
