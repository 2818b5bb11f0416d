//! Ground-truth snake, straight, and L-turn trajectories with the exact IMU
//! signals they imply, corrupted by a bias plus white-noise error model.

mod imu;
mod profile;
mod scenario;

pub use imu::{corrupt, ideal_imu_from_profile, ideal_imu_from_trajectory};
pub use profile::{generate_truth, MotionKind, MotionProfile, OVERSAMPLING};
pub use scenario::{ErrorOverrides, Role, RunSpec, Scenario, SimulatedRun, DEFAULT_RAMP};

use crate::error::Result;
use crate::strapdown::GravityPlanar;
use crate::types::{ImuSample, Trajectory};

/// Where [`ideal_imu`] takes its derivatives from.
#[derive(Clone, Copy, Debug)]
pub enum TruthSource<'a> {
    /// Analytic derivatives.
    Profile(&'a MotionProfile),
    /// Central differences of a dense sampled trajectory.
    Sampled(&'a Trajectory),
}

pub fn ideal_imu(source: TruthSource<'_>, gravity: &GravityPlanar) -> Result<Vec<ImuSample>> {
    match source {
        TruthSource::Profile(p) => ideal_imu_from_profile(p, gravity),
        TruthSource::Sampled(t) => ideal_imu_from_trajectory(t, gravity),
    }
}
