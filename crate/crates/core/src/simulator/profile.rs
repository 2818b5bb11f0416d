use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{NavState, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    Straight,
    Snake,
    LTurn,
}

/// Closed-form planar motion: speed along the heading, heading from a
/// smooth law. An optional stationary prefix and a C² ramp from rest keep
/// every derivative the IMU sees bounded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionProfile {
    pub kind: MotionKind,
    /// Cruise speed, m/s.
    pub speed: f64,
    /// Snake heading amplitude, rad.
    #[serde(default)]
    pub heading_amp: f64,
    /// Snake heading period, s.
    #[serde(default = "default_period")]
    pub heading_period: f64,
    #[serde(default)]
    pub base_heading: f64,
    /// Centre of the L-turn, s after motion starts.
    #[serde(default)]
    pub turn_time: f64,
    #[serde(default)]
    pub turn_angle: f64,
    /// Duration of the L-turn heading blend, s.
    #[serde(default = "default_blend")]
    pub turn_blend: f64,
    /// Moving duration, s.
    pub duration: f64,
    pub rate_hz: f64,
    /// Time at rest before motion starts, s.
    #[serde(default)]
    pub stationary: f64,
    /// Ramp from rest to cruise speed (and full snake amplitude), s. Zero
    /// starts at cruise.
    #[serde(default)]
    pub ramp: f64,
}

fn default_period() -> f64 {
    5.0
}

fn default_blend() -> f64 {
    3.0
}

/// 6x⁵ − 15x⁴ + 10x³ on [0, 1], clamped outside; returns (value, d/dx).
fn smootherstep(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0)
    } else if x >= 1.0 {
        (1.0, 0.0)
    } else {
        let x2 = x * x;
        (
            x2 * x * (10.0 + x * (-15.0 + 6.0 * x)),
            30.0 * x2 * (1.0 - x) * (1.0 - x),
        )
    }
}

impl MotionProfile {
    pub fn straight(speed: f64, base_heading: f64, duration: f64, rate_hz: f64) -> Self {
        Self {
            kind: MotionKind::Straight,
            speed,
            heading_amp: 0.0,
            heading_period: default_period(),
            base_heading,
            turn_time: 0.0,
            turn_angle: 0.0,
            turn_blend: default_blend(),
            duration,
            rate_hz,
            stationary: 0.0,
            ramp: 0.0,
        }
    }

    pub fn snake(speed: f64, amp: f64, period: f64, duration: f64, rate_hz: f64) -> Self {
        Self {
            kind: MotionKind::Snake,
            heading_amp: amp,
            heading_period: period,
            ..Self::straight(speed, 0.0, duration, rate_hz)
        }
    }

    pub fn l_turn(speed: f64, turn_time: f64, turn_angle: f64, duration: f64, rate_hz: f64) -> Self {
        Self {
            kind: MotionKind::LTurn,
            turn_time,
            turn_angle,
            ..Self::straight(speed, 0.0, duration, rate_hz)
        }
    }

    pub fn with_start(mut self, stationary: f64, ramp: f64) -> Self {
        self.stationary = stationary;
        self.ramp = ramp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("duration", self.duration),
            ("rate_hz", self.rate_hz),
            ("heading_period", self.heading_period),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("speed", self.speed),
            ("stationary", self.stationary),
            ("ramp", self.ramp),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        for (name, v) in [
            ("heading_amp", self.heading_amp),
            ("base_heading", self.base_heading),
            ("turn_time", self.turn_time),
            ("turn_angle", self.turn_angle),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite")));
            }
        }
        if self.kind == MotionKind::LTurn && !(self.turn_blend.is_finite() && self.turn_blend > 0.0) {
            return Err(Error::invalid("turn_blend must be positive for an L-turn"));
        }
        let steps = self.total_duration() * self.rate_hz;
        if (steps - steps.round()).abs() > 1e-6 {
            return Err(Error::invalid(
                "stationary + duration must be a whole number of sample intervals",
            ));
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.stationary + self.duration
    }

    pub fn sample_count(&self) -> usize {
        (self.total_duration() * self.rate_hz).round() as usize + 1
    }

    pub fn sample_time(&self, k: usize) -> f64 {
        k as f64 / self.rate_hz
    }

    /// Ramp factor and its time derivative at moving time `tau`.
    fn ramp(&self, tau: f64) -> (f64, f64) {
        if tau < 0.0 {
            (0.0, 0.0)
        } else if self.ramp > 0.0 {
            let (r, dr) = smootherstep(tau / self.ramp);
            (r, dr / self.ramp)
        } else {
            (1.0, 0.0)
        }
    }

    /// Heading and its rate at absolute time `t`.
    pub fn heading(&self, t: f64) -> (f64, f64) {
        let tau = (t - self.stationary).max(0.0);
        match self.kind {
            MotionKind::Straight => (self.base_heading, 0.0),
            MotionKind::Snake => {
                let w = 2.0 * std::f64::consts::PI / self.heading_period;
                let (r, dr) = self.ramp(t - self.stationary);
                let (s, c) = (w * tau).sin_cos();
                (
                    self.base_heading + r * self.heading_amp * s,
                    dr * self.heading_amp * s + r * self.heading_amp * w * c,
                )
            }
            MotionKind::LTurn => {
                let start = self.turn_time - 0.5 * self.turn_blend;
                let (h, dh) = smootherstep((tau - start) / self.turn_blend);
                let rate = if t >= self.stationary {
                    self.turn_angle * dh / self.turn_blend
                } else {
                    0.0
                };
                (self.base_heading + self.turn_angle * h, rate)
            }
        }
    }

    /// Speed along the heading and its rate at absolute time `t`.
    pub fn speed_at(&self, t: f64) -> (f64, f64) {
        let (r, dr) = self.ramp(t - self.stationary);
        (self.speed * r, self.speed * dr)
    }

    /// Navigation-frame velocity.
    pub fn velocity(&self, t: f64) -> (f64, f64) {
        let (psi, _) = self.heading(t);
        let (s, _) = self.speed_at(t);
        (s * psi.cos(), s * psi.sin())
    }

    /// Navigation-frame acceleration from the analytic derivatives.
    pub fn acceleration(&self, t: f64) -> (f64, f64) {
        let (psi, dpsi) = self.heading(t);
        let (s, ds) = self.speed_at(t);
        let (sn, cs) = psi.sin_cos();
        (ds * cs - s * dpsi * sn, ds * sn + s * dpsi * cs)
    }

    fn has_closed_form_position(&self) -> bool {
        self.kind == MotionKind::Straight && self.ramp == 0.0
    }
}

/// Three-point Gauss–Legendre rule on [a, b].
fn gauss3(f: impl Fn(f64) -> (f64, f64), a: f64, b: f64) -> (f64, f64) {
    const X: f64 = 0.774_596_669_241_483_4; // √(3/5)
    const W0: f64 = 8.0 / 9.0;
    const W1: f64 = 5.0 / 9.0;
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let (p0, q0) = f(m);
    let (p1, q1) = f(m - h * X);
    let (p2, q2) = f(m + h * X);
    (h * (W0 * p0 + W1 * (p1 + p2)), h * (W0 * q0 + W1 * (q1 + q2)))
}

/// Sub-intervals per sample interval used when no closed form exists.
pub const OVERSAMPLING: usize = 10;

/// Samples the ground-truth trajectory of `profile` at its rate. Positions
/// are exact for uniform straight motion and otherwise integrated with a
/// three-point Gauss rule on a 10× finer grid (error well below 1e-9 m over
/// the profiles used here).
pub fn generate_truth(profile: &MotionProfile) -> Result<Trajectory> {
    profile.validate()?;
    let n = profile.sample_count();
    let mut states = Vec::with_capacity(n);
    let (mut x, mut y) = (0.0, 0.0);
    let mut prev_t = 0.0;
    for k in 0..n {
        let t = profile.sample_time(k);
        if k > 0 {
            if profile.has_closed_form_position() {
                let tau = (t - profile.stationary).max(0.0);
                let (s, c) = profile.base_heading.sin_cos();
                x = profile.speed * tau * c;
                y = profile.speed * tau * s;
            } else {
                let h = (t - prev_t) / OVERSAMPLING as f64;
                for j in 0..OVERSAMPLING {
                    let a = prev_t + j as f64 * h;
                    let (dx, dy) = gauss3(|s| profile.velocity(s), a, a + h);
                    x += dx;
                    y += dy;
                }
            }
        }
        let (psi, _) = profile.heading(t);
        let (vx, vy) = profile.velocity(t);
        states.push(NavState { t, x, y, vx, vy, psi });
        prev_t = t;
    }
    Trajectory::new(states, profile.rate_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_uniform_motion() {
        let traj = generate_truth(&MotionProfile::straight(1.0, 0.0, 10.0, 120.0)).unwrap();
        let last = traj.last().unwrap();
        assert_eq!((last.x, last.y, last.vx, last.vy, last.psi), (10.0, 0.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn zero_amplitude_snake_is_straight() {
        let a = generate_truth(&MotionProfile::snake(1.3, 0.0, 5.0, 10.0, 120.0)).unwrap();
        let b = generate_truth(&MotionProfile::straight(1.3, 0.0, 10.0, 120.0)).unwrap();
        for (p, q) in a.states().iter().zip(b.states()) {
            assert!((p.x - q.x).abs() < 1e-9 && (p.y - q.y).abs() < 1e-12);
            assert_eq!((p.vx, p.vy, p.psi), (q.vx, q.vy, q.psi));
        }
    }

    /// Independent oracle: arc length of the sampled path by dense Simpson
    /// quadrature of |velocity| is the duration times the speed.
    #[test]
    fn snake_preserves_arc_length() {
        let p = MotionProfile::snake(1.0, 0.5, 5.0, 20.0, 120.0);
        let traj = generate_truth(&p).unwrap();
        let n = 200_000;
        let h = 20.0 / n as f64;
        let speed = |t: f64| {
            let (vx, vy) = p.velocity(t);
            vx.hypot(vy)
        };
        let mut simpson = speed(0.0) + speed(20.0);
        for i in 1..n {
            simpson += speed(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        simpson *= h / 3.0;
        assert!((simpson - 20.0).abs() < 1e-6);
        // chords of the sampled path undershoot the arc by O(κ²·dt²)
        assert!((traj.path_length() - 20.0).abs() < 1e-4);
    }

    #[test]
    fn constant_speed_profiles_keep_speed() {
        for p in [
            MotionProfile::snake(0.8, 0.6, 4.0, 30.0, 120.0),
            MotionProfile::l_turn(1.2, 10.0, 1.5, 30.0, 120.0),
        ] {
            for s in generate_truth(&p).unwrap().states() {
                assert!((s.speed() - p.speed).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn quadrature_matches_exact_straight_with_ramp() {
        // with a ramp the straight line still has a polynomial closed form per piece
        let p = MotionProfile::straight(1.0, 0.0, 10.0, 120.0).with_start(2.0, 1.0);
        let traj = generate_truth(&p).unwrap();
        // ∫₀¹ smootherstep = 1/2, so after the ramp x = (τ − 0.5)·speed
        let last = traj.last().unwrap();
        assert!((last.x - 9.5).abs() < 1e-9, "{}", last.x);
        let at_rest = traj.interpolate(1.0).unwrap();
        assert_eq!((at_rest.x, at_rest.vx), (0.0, 0.0));
    }

    #[test]
    fn l_turn_reaches_turn_angle() {
        let p = MotionProfile::l_turn(1.0, 10.0, std::f64::consts::FRAC_PI_2, 30.0, 120.0);
        let traj = generate_truth(&p).unwrap();
        assert!((traj.last().unwrap().psi - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(traj.first().unwrap().psi, 0.0);
    }

    #[test]
    fn invalid_profiles_are_rejected() {
        assert!(generate_truth(&MotionProfile::straight(1.0, 0.0, 0.0, 120.0)).is_err());
        assert!(generate_truth(&MotionProfile::straight(-1.0, 0.0, 1.0, 120.0)).is_err());
        assert!(generate_truth(&MotionProfile::snake(1.0, 0.5, 0.0, 1.0, 120.0)).is_err());
        assert!(generate_truth(&MotionProfile::straight(1.0, 0.0, 1.001, 120.0)).is_err());
    }
}
