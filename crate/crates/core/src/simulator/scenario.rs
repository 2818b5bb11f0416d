//! Scenario files: a set of named runs sharing one sensor error model.
//!
//! ```toml
//! seed = 7
//! rate_hz = 120.0
//! gt_decimation = 12
//! error_scale = 50.0
//!
//! [error]             # optional; SI units, defaults from the Movella DOT datasheet
//! gyro_bias = 4.8481e-5
//!
//! [[run]]
//! name = "train"
//! role = "train"
//! kind = "snake"
//! speed = 1.0
//! heading_amp = 0.6
//! heading_period = 4.0
//! duration = 120.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strapdown::GravityPlanar;
use crate::types::{ImuErrorSpec, ImuSample, Trajectory};

use super::imu::{corrupt, ideal_imu_from_profile};
use super::profile::{generate_truth, MotionKind, MotionProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Train,
    Test,
}

impl Role {
    /// Default stationary prefix, s.
    pub fn default_stationary(self) -> f64 {
        match self {
            Role::Train => 60.0,
            Role::Test => 5.0,
        }
    }
}

/// Optional overrides of the datasheet error magnitudes, SI units.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorOverrides {
    pub gyro_bias: Option<f64>,
    pub accel_bias: Option<f64>,
    pub gyro_noise_density: Option<f64>,
    pub accel_noise_density: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub name: String,
    pub role: Role,
    pub kind: MotionKind,
    pub speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading_amp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading_period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_heading: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_blend: Option<f64>,
    pub duration: f64,
    /// Defaults to 60 s for training runs and 5 s for test runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<f64>,
    /// Defaults to the scenario seed plus the run index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    #[serde(default = "default_rate")]
    pub rate_hz: f64,
    /// IMU samples per ground-truth sample.
    #[serde(default = "default_decimation")]
    pub gt_decimation: usize,
    /// Multiplier on every error magnitude.
    #[serde(default = "default_scale")]
    pub error_scale: f64,
    #[serde(default)]
    pub gravity: GravityPlanar,
    #[serde(default)]
    pub error: ErrorOverrides,
    #[serde(rename = "run")]
    pub runs: Vec<RunSpec>,
}

fn default_rate() -> f64 {
    120.0
}

fn default_decimation() -> usize {
    12
}

fn default_scale() -> f64 {
    1.0
}

/// Speed ramp from rest applied when a run does not set one, s.
pub const DEFAULT_RAMP: f64 = 1.0;

impl RunSpec {
    pub fn profile(&self, rate_hz: f64) -> MotionProfile {
        let base = MotionProfile::straight(self.speed, self.base_heading.unwrap_or(0.0), self.duration, rate_hz);
        MotionProfile {
            kind: self.kind,
            heading_amp: self.heading_amp.unwrap_or(base.heading_amp),
            heading_period: self.heading_period.unwrap_or(base.heading_period),
            turn_time: self.turn_time.unwrap_or(0.5 * self.duration),
            turn_angle: self.turn_angle.unwrap_or(std::f64::consts::FRAC_PI_2),
            turn_blend: self.turn_blend.unwrap_or(base.turn_blend),
            stationary: self.stationary.unwrap_or(self.role.default_stationary()),
            ramp: self.ramp.unwrap_or(DEFAULT_RAMP),
            ..base
        }
    }
}

/// One simulated run: dense truth, decimated ground truth, and corrupted IMU.
#[derive(Clone, Debug)]
pub struct SimulatedRun {
    pub name: String,
    pub role: Role,
    pub profile: MotionProfile,
    pub error_spec: ImuErrorSpec,
    /// Truth at the IMU rate.
    pub truth: Trajectory,
    /// Truth at the ground-truth rate; every timestamp is an IMU timestamp.
    pub gt: Trajectory,
    pub imu: Vec<ImuSample>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs.is_empty() {
            return Err(Error::Config("scenario has no runs".into()));
        }
        if self.gt_decimation == 0 {
            return Err(Error::Config("gt_decimation must be at least 1".into()));
        }
        if !(self.error_scale.is_finite() && self.error_scale >= 0.0) {
            return Err(Error::Config("error_scale must be non-negative".into()));
        }
        let mut names = std::collections::HashSet::new();
        for (i, run) in self.runs.iter().enumerate() {
            if !names.insert(run.name.as_str()) {
                return Err(Error::Config(format!("duplicate run name `{}`", run.name)));
            }
            run.profile(self.rate_hz)
                .validate()
                .map_err(|e| Error::Config(format!("run `{}`: {e}", run.name)))?;
            self.error_spec(i).validate()?;
        }
        Ok(())
    }

    /// Error model of run `index`, scaled by `error_scale`.
    pub fn error_spec(&self, index: usize) -> ImuErrorSpec {
        let seed = self.runs[index]
            .seed
            .unwrap_or_else(|| self.seed.wrapping_add(index as u64));
        let base = ImuErrorSpec::movella_dot(self.rate_hz, seed);
        ImuErrorSpec {
            gyro_bias: self.error.gyro_bias.unwrap_or(base.gyro_bias),
            accel_bias: self.error.accel_bias.unwrap_or(base.accel_bias),
            gyro_noise_density: self.error.gyro_noise_density.unwrap_or(base.gyro_noise_density),
            accel_noise_density: self.error.accel_noise_density.unwrap_or(base.accel_noise_density),
            ..base
        }
        .scaled(self.error_scale)
    }

    pub fn simulate_run(&self, index: usize) -> Result<SimulatedRun> {
        let spec = &self.runs[index];
        let profile = spec.profile(self.rate_hz);
        let truth = generate_truth(&profile)?;
        let ideal = ideal_imu_from_profile(&profile, &self.gravity)?;
        let error_spec = self.error_spec(index);
        let imu = corrupt(&ideal, &error_spec)?;
        let gt_states = truth.states().iter().step_by(self.gt_decimation).copied().collect();
        let gt = Trajectory::new(gt_states, self.rate_hz / self.gt_decimation as f64)?;
        Ok(SimulatedRun {
            name: spec.name.clone(),
            role: spec.role,
            profile,
            error_spec,
            truth,
            gt,
            imu,
        })
    }

    pub fn simulate(&self) -> Result<Vec<SimulatedRun>> {
        (0..self.runs.len()).map(|i| self.simulate_run(i)).collect()
    }

    /// One long training snake and four short test paths (straight, two
    /// snakes of differing period, L-turn) with the field-trial durations.
    pub fn reference() -> Self {
        Self::with_durations(794.0, [37.0, 46.0, 39.0, 70.0], 1.0)
    }

    /// Desk-scale variant: 120 s training snake, 30–60 s tests, errors ×50.
    pub fn desk() -> Self {
        Self::with_durations(120.0, [30.0, 45.0, 40.0, 60.0], 50.0)
    }

    fn with_durations(train: f64, tests: [f64; 4], error_scale: f64) -> Self {
        let run = |name: &str, role, kind, duration| RunSpec {
            name: name.into(),
            role,
            kind,
            speed: 1.0,
            heading_amp: None,
            heading_period: None,
            base_heading: None,
            turn_time: None,
            turn_angle: None,
            turn_blend: None,
            duration,
            stationary: None,
            ramp: None,
            seed: None,
        };
        let snake = |name: &str, role, duration, amp, period| RunSpec {
            heading_amp: Some(amp),
            heading_period: Some(period),
            ..run(name, role, MotionKind::Snake, duration)
        };
        Self {
            seed: 2025,
            rate_hz: 120.0,
            gt_decimation: 12,
            error_scale,
            gravity: GravityPlanar::level(),
            error: ErrorOverrides::default(),
            runs: vec![
                snake("train", Role::Train, train, 0.6, 4.0),
                RunSpec {
                    base_heading: Some(0.3),
                    ..run("straight", Role::Test, MotionKind::Straight, tests[0])
                },
                snake("snake-a", Role::Test, tests[1], 0.5, 4.0),
                snake("snake-b", Role::Test, tests[2], 0.6, 5.0),
                RunSpec {
                    turn_angle: Some(std::f64::consts::FRAC_PI_2),
                    turn_time: Some(0.5 * tests[3]),
                    ..run("l-turn", Role::Test, MotionKind::LTurn, tests[3])
                },
            ],
        }
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Self::reference()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scenario_has_one_train_and_four_tests() {
        let s = Scenario::reference();
        s.validate().unwrap();
        assert_eq!(s.runs.iter().filter(|r| r.role == Role::Train).count(), 1);
        assert_eq!(s.runs.iter().filter(|r| r.role == Role::Test).count(), 4);
    }

    #[test]
    fn toml_round_trip() {
        let s = Scenario::desk();
        let back = Scenario::from_toml(&s.to_toml()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn zero_duration_is_rejected() {
        let mut s = Scenario::desk();
        s.runs[1].duration = 0.0;
        assert!(matches!(Scenario::from_toml(&s.to_toml()), Err(Error::Config(_))));
    }

    #[test]
    fn gt_timestamps_are_imu_timestamps() {
        let mut s = Scenario::desk();
        s.runs.truncate(2);
        s.runs[1].duration = 3.0;
        let run = s.simulate_run(1).unwrap();
        assert_eq!(run.gt.rate_hz(), 10.0);
        for (i, g) in run.gt.states().iter().enumerate() {
            assert_eq!(g.t, run.imu[12 * i].t);
        }
        // stationary prefix reads pure error
        let b = s.error_spec(1);
        assert!((b.accel_bias - 50.0 * crate::units::milli_g_to_mps2(0.03)).abs() < 1e-15);
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let s = Scenario::from_toml(
            r#"
seed = 1
[[run]]
name = "a"
role = "test"
kind = "straight"
speed = 1.0
duration = 2.0
"#,
        )
        .unwrap();
        assert_eq!(s.rate_hz, 120.0);
        assert_eq!(s.runs[0].profile(120.0).stationary, 5.0);
        assert!(Scenario::from_toml("seed = 1\nrun = []\n").is_err());
    }
}
