//! Unit conversions for datasheet sensor error figures.

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

pub fn deg_per_hour_to_rad_per_s(b: f64) -> f64 {
    b * std::f64::consts::PI / (180.0 * 3600.0)
}

pub fn milli_g_to_mps2(b: f64) -> f64 {
    b * 1e-3 * STANDARD_GRAVITY
}

/// Discrete white-noise standard deviation for a noise density sampled at `rate_hz`.
pub fn noise_sigma_per_sample(density: f64, rate_hz: f64) -> f64 {
    density * rate_hz.sqrt()
}
