use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndiff::{AdamConfig, Architecture, SchedulerConfig};
use crate::strapdown::GravityPlanar;

use super::loss::LossWeights;

/// Floating-point precision of training and inference.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

/// Network shape. Input and output widths are fixed at 4 and 5.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub depth: usize,
    pub width: usize,
    pub dropout: f64,
    pub layer_norm: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            depth: 10,
            width: 128,
            dropout: 0.2,
            layer_norm: true,
        }
    }
}

impl NetworkConfig {
    pub fn architecture(&self) -> Architecture {
        Architecture::mlp(4, self.depth, self.width, 5)
            .with_dropout(self.dropout)
            .with_layer_norm(self.layer_norm)
    }
}

/// How consecutive windows are chained at prediction time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeadingSource {
    /// Direction of the predicted anchor-frame velocity at the window end.
    Velocity,
    /// Change of the network's heading output across the window.
    Network,
    /// Trapezoidal integral of the window's yaw-rate samples, the exact
    /// solution of the heading equation the physics term enforces.
    #[default]
    Integrated,
}

/// Every training and prediction hyperparameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PinnConfig {
    pub seed: u64,
    pub precision: Precision,
    pub epochs: usize,
    /// Windows per optimizer step.
    pub batch_size: usize,
    pub window_len: usize,
    pub stride: usize,
    pub val_fraction: f64,
    pub n_phys: usize,
    pub n_ic: usize,
    /// Collocation points drawn per step; the whole set when unset.
    pub phys_batch: Option<usize>,
    /// Apply dropout on the physics pass as well.
    pub dropout_on_physics: bool,
    /// Stop once the epoch's training total changes by less than this.
    pub convergence_eps: f64,
    pub network: NetworkConfig,
    pub loss: LossWeights,
    pub optimizer: AdamConfig,
    pub scheduler: SchedulerConfig,
    pub gravity: GravityPlanar,
    pub heading: HeadingSource,
    /// Below this predicted speed, m/s, the heading is carried unchanged.
    pub min_heading_speed: f64,
}

impl Default for PinnConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            precision: Precision::F64,
            epochs: 1000,
            batch_size: 32,
            window_len: 12,
            stride: 2,
            val_fraction: 0.1,
            n_phys: 2000,
            n_ic: 200,
            phys_batch: None,
            dropout_on_physics: false,
            convergence_eps: 1e-8,
            network: NetworkConfig::default(),
            loss: LossWeights::default(),
            optimizer: AdamConfig::default(),
            scheduler: SchedulerConfig::default(),
            gravity: GravityPlanar::level(),
            heading: HeadingSource::default(),
            min_heading_speed: 0.05,
        }
    }
}

impl PinnConfig {
    /// Small network and budget for quick runs.
    pub fn smoke() -> Self {
        Self {
            epochs: 20,
            network: NetworkConfig {
                depth: 2,
                width: 16,
                ..NetworkConfig::default()
            },
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.batch_size == 0 {
            return fail("batch_size must be positive".into());
        }
        if self.window_len < 2 {
            return fail(format!("window_len must be at least 2, got {}", self.window_len));
        }
        if self.stride == 0 {
            return fail("stride must be positive".into());
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return fail(format!("val_fraction {} outside [0, 1)", self.val_fraction));
        }
        if self.n_phys == 0 || self.n_ic == 0 {
            return fail("n_phys and n_ic must be positive".into());
        }
        if self.phys_batch == Some(0) {
            return fail("phys_batch must be positive when set".into());
        }
        if !(self.convergence_eps >= 0.0) {
            return fail("convergence_eps must be non-negative".into());
        }
        let o = &self.optimizer;
        if !(o.lr > 0.0 && o.lr.is_finite()) || !(0.0..1.0).contains(&o.beta1) || !(0.0..1.0).contains(&o.beta2) {
            return fail("optimizer settings out of range".into());
        }
        if !(o.eps > 0.0) || !(o.weight_decay >= 0.0 && o.lr * o.weight_decay < 1.0) {
            return fail("optimizer eps must be positive and weight decay in [0, 1/lr)".into());
        }
        let s = &self.scheduler;
        if !(s.factor > 0.0 && s.factor <= 1.0) || !(s.threshold >= 0.0) {
            return fail("scheduler factor must be in (0, 1] and threshold non-negative".into());
        }
        if !(self.min_heading_speed >= 0.0) {
            return fail("min_heading_speed must be non-negative".into());
        }
        self.loss.validate()?;
        self.network.architecture().validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_hyperparameters() {
        let c = PinnConfig::default();
        assert_eq!((c.epochs, c.batch_size, c.n_phys, c.n_ic), (1000, 32, 2000, 200));
        assert_eq!((c.network.depth, c.network.width, c.network.dropout), (10, 128, 0.2));
        assert_eq!(c.optimizer.lr, 1e-3);
        assert_eq!(c.optimizer.weight_decay, 1e-4);
        assert_eq!(
            (c.loss.lambda_data, c.loss.lambda_init, c.loss.lambda_phys),
            (1.0, 1.0, 0.1)
        );
        c.validate().unwrap();
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = PinnConfig::smoke();
        assert_eq!(PinnConfig::from_toml(&c.to_toml()).unwrap(), c);
        let partial = PinnConfig::from_toml("epochs = 5\n[network]\nwidth = 8\n").unwrap();
        assert_eq!(partial.epochs, 5);
        assert_eq!(partial.network.width, 8);
        assert_eq!(partial.network.depth, 10);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(PinnConfig::from_toml("epoch = 5").is_err());
        assert!(PinnConfig::from_toml("window_len = 1").is_err());
        assert!(PinnConfig::from_toml("[loss]\nlambda_data = 0\nlambda_init = 0\nlambda_phys = 0").is_err());
        assert!(PinnConfig::from_toml("[network]\ndropout = 1.0").is_err());
    }
}
