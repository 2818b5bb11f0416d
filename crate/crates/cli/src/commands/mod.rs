//! Command implementations. Each returns typed results; printing lives in
//! the dispatcher.

pub mod baseline;
pub mod eval;
pub mod simulate;
pub mod sweep;
pub mod train;

use morpi::metrics::EvalReport;
use serde::{Deserialize, Serialize};

pub const INS: &str = "2D-INS";
pub const DR: &str = "2D-DR";
pub const PINN: &str = "MoRPI-PINN";

/// Scalar metrics of one estimate; the per-sample series go to plot files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub ate: f64,
    pub vrmse_x: f64,
    pub vrmse_y: f64,
    pub nvrmse_x: f64,
    pub nvrmse_y: f64,
}

impl From<&EvalReport> for Metrics {
    fn from(r: &EvalReport) -> Self {
        Self {
            ate: r.ate,
            vrmse_x: r.vrmse_x,
            vrmse_y: r.vrmse_y,
            nvrmse_x: r.nvrmse_x,
            nvrmse_y: r.nvrmse_y,
        }
    }
}
