//! Differentiable dense networks with a forward time-tangent channel.
//!
//! Every primitive maps `(value, tangent)` pairs, so one forward pass yields
//! both the network outputs and their derivative with respect to the time
//! input. [`Network::backward`] then differentiates any scalar built from
//! either channel with respect to all parameters.

mod activation;
mod matrix;
mod network;
mod optim;
mod params;

pub use activation::{sintanh, sintanh_jet, sintanh_prime};
pub use matrix::Matrix;
pub use network::{DualBatch, ForwardMode, Network, Trace, LAYER_NORM_EPS};
pub use optim::{adam_step, scheduler_step, AdamConfig, OptimizerState, SchedulerConfig, SchedulerEvent};
pub use params::{Architecture, LayerParams, Params};
