//! Physics-informed navigation network: loss assembly, datasets, training,
//! prediction and checkpoints.
//!
//! The network maps `(t, fx, fy, ωz)` to `(x, y, vx, vy, ψ)` within a short
//! window. Time runs from the window start and outputs live in the window's
//! anchor frame, so a prediction is position and velocity relative to the
//! state at the window start, rotated by the anchor heading. The objective
//! weights a supervised term, an initial-position term and the residual of
//! the planar navigation equations, the latter differentiated through the
//! network's forward time tangent.

mod checkpoint;
mod config;
mod data;
mod loss;
mod model;
mod predict;
mod train;

pub use checkpoint::{Checkpoint, TrainingSnapshot, CHECKPOINT_MAGIC};
pub use config::{HeadingSource, NetworkConfig, PinnConfig, Precision};
pub use data::{
    build_datasets, from_anchor_frame, input_bounds, sample_collocation, split_validation, to_anchor_frame,
    CollocationSet, InitSet, SupervisedSet,
};
pub use loss::{
    data_loss, data_loss_grad, init_loss, init_loss_grad, physics_loss, physics_residual, physics_residual_grad,
    total_loss, Input, LossBreakdown, LossWeights, PosVel, State, StateModel,
};
pub use model::{DropoutPlan, ObjectiveBatch, PinnModel, EXTRAPOLATION_Z};
pub use predict::{predict_trajectory, Anchoring, PredictOptions, Prediction};
pub use train::{train, EpochLog, StopReason, TrainOutcome, TrainState, Trainer};
