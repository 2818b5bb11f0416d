//! Checkpoint container: the magic line `MORPIPINN-CKPT-1` followed by one
//! JSON document with the architecture, flattened parameters, normalization
//! statistics, configuration (including seeds) and optimizer state.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndiff::{AdamConfig, Architecture, Network, OptimizerState, Params, SchedulerConfig};
use crate::normalize::AxisStats;
use crate::scalar::{cast, Scalar};

use super::config::{PinnConfig, Precision};
use super::model::PinnModel;
use super::train::{EpochLog, TrainOutcome, TrainState};

pub const CHECKPOINT_MAGIC: &str = "MORPIPINN-CKPT-1";

/// Optimizer and loop state needed to resume training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSnapshot {
    pub epoch: usize,
    /// Current (not best) parameters.
    pub params: Vec<f64>,
    pub adam: AdamConfig,
    pub scheduler: SchedulerConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    pub lr: f64,
    pub best_loss: Option<f64>,
    pub plateau_epochs: usize,
    pub stale_epochs: usize,
    pub stop: bool,
    pub best_val: Option<f64>,
    pub prev_total: Option<f64>,
    /// Every epoch so far, including those of earlier sessions.
    #[serde(default)]
    pub log: Vec<EpochLog>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub precision: Precision,
    pub config: PinnConfig,
    pub architecture: Architecture,
    /// Best-validation parameters in canonical flatten order.
    pub params: Vec<f64>,
    pub input_stats: [AxisStats<f64>; 4],
    pub output_stats: [AxisStats<f64>; 5],
    pub window_len: usize,
    pub sample_interval: f64,
    pub training: Option<TrainingSnapshot>,
    /// Wall-clock creation time, seconds since the Unix epoch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
}

fn flat<T: Scalar>(p: &Params<T>) -> Vec<f64> {
    p.iter().map(|v| v.to_f64_lossy()).collect()
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn stats<A: Scalar, B: Scalar, const N: usize>(s: &[AxisStats<A>; N]) -> [AxisStats<B>; N] {
    s.each_ref().map(|a| AxisStats {
        mean: cast(a.mean),
        std: cast(a.std),
    })
}

impl Checkpoint {
    pub fn from_model<T: Scalar>(config: &PinnConfig, model: &PinnModel<T>) -> Self {
        Self {
            precision: config.precision,
            config: config.clone(),
            architecture: model.network.arch.clone(),
            params: flat(&model.network.params),
            input_stats: stats(&model.input_stats),
            output_stats: stats(&model.output_stats),
            window_len: model.window_len,
            sample_interval: model.sample_interval.to_f64_lossy(),
            training: None,
            created_unix: None,
        }
    }

    pub fn from_outcome<T: Scalar>(config: &PinnConfig, outcome: &TrainOutcome<T>) -> Self {
        let s = &outcome.state;
        let o = &s.optimizer;
        Self {
            training: Some(TrainingSnapshot {
                epoch: s.epoch,
                params: flat(&s.params),
                adam: o.adam,
                scheduler: o.scheduler,
                m: flat(&o.m),
                v: flat(&o.v),
                step: o.step,
                lr: o.lr,
                best_loss: finite(o.best_loss),
                plateau_epochs: o.plateau_epochs,
                stale_epochs: o.stale_epochs,
                stop: o.stop,
                best_val: finite(s.best_val),
                prev_total: s.prev_total,
                log: outcome.log.clone(),
            }),
            ..Self::from_model(config, &outcome.model)
        }
    }

    pub fn with_created(mut self, unix_seconds: Option<u64>) -> Self {
        self.created_unix = unix_seconds;
        self
    }

    fn unflatten<T: Scalar>(&self, v: &[f64], what: &str) -> Result<Params<T>> {
        let cast: Vec<T> = v.iter().map(|&x| T::lit(x)).collect();
        Params::unflatten(&self.architecture, &cast).map_err(|e| Error::Checkpoint(format!("{what}: {e}")))
    }

    pub fn model<T: Scalar>(&self) -> Result<PinnModel<T>> {
        let params = self.unflatten(&self.params, "parameters")?;
        let network =
            Network::from_params(self.architecture.clone(), params).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let model = PinnModel {
            network,
            input_stats: stats(&self.input_stats),
            output_stats: stats(&self.output_stats),
            window_len: self.window_len,
            sample_interval: T::lit(self.sample_interval),
        };
        model.validate().map_err(|e| Error::Checkpoint(e.to_string()))?;
        Ok(model)
    }

    /// Trainer state for resuming, if the checkpoint carries one.
    pub fn train_state<T: Scalar>(&self) -> Result<Option<TrainState<T>>> {
        let Some(t) = &self.training else {
            return Ok(None);
        };
        let params = self.unflatten(&t.params, "training parameters")?;
        Ok(Some(TrainState {
            epoch: t.epoch,
            optimizer: OptimizerState {
                adam: t.adam,
                scheduler: t.scheduler,
                m: self.unflatten(&t.m, "first moments")?,
                v: self.unflatten(&t.v, "second moments")?,
                step: t.step,
                lr: t.lr,
                best_loss: t.best_loss.unwrap_or(f64::INFINITY),
                plateau_epochs: t.plateau_epochs,
                stale_epochs: t.stale_epochs,
                stop: t.stop,
            },
            best_params: self.unflatten(&self.params, "parameters")?,
            params,
            best_val: t.best_val.unwrap_or(f64::INFINITY),
            prev_total: t.prev_total,
        }))
    }

    /// Checks that a model architecture matches this checkpoint.
    pub fn check_architecture(&self, arch: &Architecture) -> Result<()> {
        if &self.architecture != arch {
            return Err(Error::Checkpoint(format!(
                "architecture mismatch: checkpoint has {:?} hidden widths, configuration asks for {:?}",
                self.architecture.hidden, arch.hidden
            )));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let body = serde_json::to_string(self).expect("checkpoint serializes");
        format!("{CHECKPOINT_MAGIC}\n{body}\n")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (magic, body) = text.split_once('\n').unwrap_or((text, ""));
        if magic.trim_end_matches('\r') != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint(format!(
                "not a checkpoint: first line must be {CHECKPOINT_MAGIC}"
            )));
        }
        let c: Self = serde_json::from_str(body).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if c.params.len() != c.architecture.param_count() {
            return Err(Error::Checkpoint(format!(
                "{} parameters for an architecture with {}",
                c.params.len(),
                c.architecture.param_count()
            )));
        }
        Ok(c)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
    }
}
