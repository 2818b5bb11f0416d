//! Run configuration: one TOML file holding every module's settings, with
//! command-line flags (or `MORPI_*` environment variables) layered on top.

use std::path::Path;

use clap::Args;
use morpi::metrics::VelocityRange;
use morpi::pinn::{HeadingSource, LossWeights, PinnConfig, Precision};
use morpi::strapdown::{DistanceSource, Scheme};
use serde::de::{DeserializeOwned, IntoDeserializer};
use serde::{Deserialize, Serialize};

use crate::commands::simulate::BUILTIN_SCENARIOS;
use crate::error::{CliError, CliResult};

/// λ grid explored by `sweep`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub lambda_data: Vec<f64>,
    pub lambda_init: Vec<f64>,
    pub lambda_phys: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambda_data: vec![1.0],
            lambda_init: vec![1.0],
            lambda_phys: vec![0.0, 0.01, 0.1, 1.0],
        }
    }
}

impl SweepConfig {
    /// Every valid weight combination, in grid order.
    pub fn grid(&self) -> Vec<LossWeights> {
        let mut out = Vec::new();
        for &d in &self.lambda_data {
            for &i in &self.lambda_init {
                for &p in &self.lambda_phys {
                    if let Ok(w) = LossWeights::new(d, i, p) {
                        out.push(w);
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Replaces both the scenario seed and the training seed when set.
    pub seed: Option<u64>,
    /// Scenario file, or one of the built-in names `desk` and `reference`.
    pub scenario: Option<String>,
    /// Replaces the scenario's error multiplier when set.
    pub error_scale: Option<f64>,
    /// Remove biases estimated over each run's stationary prefix.
    pub calibrate: bool,
    /// Stationary prefix of directly given training files, s.
    pub train_stationary: f64,
    /// Stationary prefix of directly given test files, s.
    pub test_stationary: f64,
    pub scheme: Scheme,
    /// Distance source of the dead-reckoning baseline.
    pub dr_distance: DistanceSource,
    pub velocity_range: VelocityRange,
    pub pinn: PinnConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            scenario: None,
            error_scale: None,
            calibrate: true,
            train_stationary: 60.0,
            test_stationary: 5.0,
            scheme: Scheme::default(),
            dr_distance: DistanceSource::default(),
            velocity_range: VelocityRange::default(),
            pinn: PinnConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses a configuration; a top-level `seed` also seeds training.
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| CliError::usage(format!("run configuration: {e}")))?;
        if let Some(s) = cfg.seed {
            cfg.pinn.seed = s;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        // relative scenario paths are relative to the file naming them
        if let (Some(s), Some(dir)) = (&cfg.scenario, path.parent()) {
            if !BUILTIN_SCENARIOS.contains(&s.as_str()) && Path::new(s).is_relative() {
                cfg.scenario = Some(dir.join(s).to_string_lossy().into_owned());
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        self.pinn.validate()?;
        if !(self.train_stationary >= 0.0 && self.test_stationary >= 0.0) {
            return Err(CliError::usage("stationary durations must be non-negative"));
        }
        if let Some(s) = self.error_scale {
            if !(s.is_finite() && s >= 0.0) {
                return Err(CliError::usage("error_scale must be non-negative"));
            }
        }
        Ok(())
    }
}

fn parse_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    T::deserialize(s.into_deserializer()).map_err(|e: serde::de::value::Error| e.to_string())
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    parse_enum(s)
}

fn parse_heading(s: &str) -> Result<HeadingSource, String> {
    parse_enum(s)
}

/// Flags that replace configuration keys. Each also reads `MORPI_<FLAG>`.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    #[arg(long, global = true, env = "MORPI_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "MORPI_ERROR_SCALE")]
    pub error_scale: Option<f64>,
    /// Skip stationary-prefix bias calibration.
    #[arg(long, global = true, env = "MORPI_NO_CALIBRATE")]
    pub no_calibrate: bool,
    #[arg(long, global = true, env = "MORPI_EPOCHS")]
    pub epochs: Option<usize>,
    #[arg(long, global = true, env = "MORPI_BATCH_SIZE")]
    pub batch_size: Option<usize>,
    #[arg(long, global = true, env = "MORPI_WINDOW_LEN")]
    pub window_len: Option<usize>,
    #[arg(long, global = true, env = "MORPI_STRIDE")]
    pub stride: Option<usize>,
    #[arg(long, global = true, env = "MORPI_DEPTH")]
    pub depth: Option<usize>,
    #[arg(long, global = true, env = "MORPI_WIDTH")]
    pub width: Option<usize>,
    #[arg(long, global = true, env = "MORPI_DROPOUT")]
    pub dropout: Option<f64>,
    #[arg(long, global = true, env = "MORPI_LR")]
    pub lr: Option<f64>,
    #[arg(long, global = true, env = "MORPI_WEIGHT_DECAY")]
    pub weight_decay: Option<f64>,
    #[arg(long, global = true, env = "MORPI_LAMBDA_DATA")]
    pub lambda_data: Option<f64>,
    #[arg(long, global = true, env = "MORPI_LAMBDA_INIT")]
    pub lambda_init: Option<f64>,
    #[arg(long, global = true, env = "MORPI_LAMBDA_PHYS")]
    pub lambda_phys: Option<f64>,
    #[arg(long, global = true, env = "MORPI_N_PHYS")]
    pub n_phys: Option<usize>,
    #[arg(long, global = true, env = "MORPI_PHYS_BATCH")]
    pub phys_batch: Option<usize>,
    /// `f32` or `f64`.
    #[arg(long, global = true, env = "MORPI_PRECISION", value_parser = parse_precision)]
    pub precision: Option<Precision>,
    /// `integrated`, `velocity` or `network`.
    #[arg(long, global = true, env = "MORPI_HEADING", value_parser = parse_heading)]
    pub heading: Option<HeadingSource>,
}

impl Overrides {
    /// Whether any flag changes the network shape.
    pub fn touches_network(&self) -> bool {
        self.depth.is_some() || self.width.is_some() || self.dropout.is_some()
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> CliResult<()> {
        let p = &mut cfg.pinn;
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(s) = cfg.seed {
            p.seed = s;
        }
        if let Some(e) = self.error_scale {
            cfg.error_scale = Some(e);
        }
        if self.no_calibrate {
            cfg.calibrate = false;
        }
        macro_rules! set {
            ($($flag:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$flag { $target = v; })*
            };
        }
        set!(
            epochs => p.epochs,
            batch_size => p.batch_size,
            window_len => p.window_len,
            stride => p.stride,
            depth => p.network.depth,
            width => p.network.width,
            dropout => p.network.dropout,
            lr => p.optimizer.lr,
            weight_decay => p.optimizer.weight_decay,
            n_phys => p.n_phys,
            precision => p.precision,
            heading => p.heading,
        );
        if let Some(k) = self.phys_batch {
            p.phys_batch = Some(k);
        }
        if self.lambda_data.is_some() || self.lambda_init.is_some() || self.lambda_phys.is_some() {
            p.loss = LossWeights::new(
                self.lambda_data.unwrap_or(p.loss.lambda_data),
                self.lambda_init.unwrap_or(p.loss.lambda_init),
                self.lambda_phys.unwrap_or(p.loss.lambda_phys),
            )?;
        }
        cfg.validate()
    }
}
