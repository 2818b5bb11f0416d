//! Pure inertial navigation for wheeled robots driven in a snake-like
//! slithering pattern: a trajectory and IMU simulator, a planar strapdown
//! baseline, and a physics-informed network whose loss embeds the planar
//! navigation equations.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below pin the common precisions.

// Negated comparisons deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Row loops index several parallel buffers; tuple results stay inline.
#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod error;
pub mod io;
pub mod metrics;
pub mod ndiff;
pub mod normalize;
pub mod pinn;
pub mod preprocess;
pub mod scalar;
pub mod simulator;
pub mod strapdown;
pub mod types;
pub mod units;
pub mod window;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use types::{wrap_angle, ImuErrorSpec, ImuSample, NavState, Trajectory};
pub use window::{make_windows, Window};

pub type Network32 = ndiff::Network<f32>;
pub type Network64 = ndiff::Network<f64>;
pub type PinnModel32 = pinn::PinnModel<f32>;
pub type PinnModel64 = pinn::PinnModel<f64>;
pub type Trajectory32 = Trajectory<f32>;
pub type Trajectory64 = Trajectory<f64>;
