//! The physics residual vanishes on exact simulator solutions.

use morpi::pinn::{physics_loss, Input, State, StateModel};
use morpi::simulator::{ideal_imu_from_profile, MotionProfile, Scenario};
use morpi::strapdown::GravityPlanar;
use morpi::Result;

/// Emits the analytic state and its exact time derivative at every input time.
struct Oracle<'a> {
    profile: &'a MotionProfile,
}

impl Oracle<'_> {
    fn at(&self, t: f64) -> (State<f64>, State<f64>) {
        let (psi, dpsi) = self.profile.heading(t);
        let (vx, vy) = self.profile.velocity(t);
        let (ax, ay) = self.profile.acceleration(t);
        // position never enters the residual except through its rate
        ([0.0, 0.0, vx, vy, psi], [vx, vy, ax, ay, dpsi])
    }
}

impl StateModel<f64> for Oracle<'_> {
    fn states(&self, inputs: &[Input<f64>]) -> Result<Vec<State<f64>>> {
        Ok(inputs.iter().map(|u| self.at(u[0]).0).collect())
    }

    fn states_and_rates(&self, inputs: &[Input<f64>]) -> Result<(Vec<State<f64>>, Vec<State<f64>>)> {
        Ok(inputs.iter().map(|u| self.at(u[0])).unzip())
    }
}

fn residual_on(scenario: &Scenario) -> f64 {
    let mut worst = 0.0f64;
    for run in &scenario.runs {
        let profile = run.profile(scenario.rate_hz);
        let imu = ideal_imu_from_profile(&profile, &scenario.gravity).unwrap();
        let colloc: Vec<Input<f64>> = imu.iter().map(|s| [s.t, s.fx, s.fy, s.omega_z]).collect();
        let loss = physics_loss(&Oracle { profile: &profile }, &colloc, &scenario.gravity).unwrap();
        assert!(loss < 1e-10, "run {}: physics loss {loss:e}", run.name);
        worst = worst.max(loss);
    }
    worst
}

#[test]
fn exact_solutions_of_every_scenario_have_zero_residual() {
    residual_on(&Scenario::reference());
    residual_on(&Scenario::desk());
}

#[test]
fn residual_vanishes_with_tilted_gravity() {
    let mut s = Scenario::desk();
    s.gravity = GravityPlanar { gx: 0.12, gy: -0.07 };
    residual_on(&s);
}

#[test]
fn mismatched_gravity_is_detected() {
    let s = Scenario::desk();
    let run = &s.runs[1];
    let profile = run.profile(s.rate_hz);
    let imu = ideal_imu_from_profile(&profile, &s.gravity).unwrap();
    let colloc: Vec<Input<f64>> = imu.iter().map(|u| [u.t, u.fx, u.fy, u.omega_z]).collect();
    let wrong = GravityPlanar { gx: 0.1, gy: 0.0 };
    let loss = physics_loss(&Oracle { profile: &profile }, &colloc, &wrong).unwrap();
    assert!((loss - 0.01).abs() < 1e-9, "{loss}");
}
