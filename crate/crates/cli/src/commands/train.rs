use std::path::Path;

use morpi::pinn::{build_datasets, Checkpoint, EpochLog, Precision, StopReason, SupervisedSet, Trainer};
use morpi::types::uniform_interval;
use morpi::{ImuSample, Scalar};

use crate::config::RunConfig;
use crate::data::RunData;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_epoch_log, write_text};

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const EPOCH_LOG_FILE: &str = "epochs.csv";
pub const RUN_CONFIG_FILE: &str = "run_config.toml";
pub const DIAGNOSTIC_FILE: &str = "diagnostic.txt";

#[derive(Clone, Debug)]
pub struct TrainResult {
    /// Best-validation model plus resumable state.
    pub checkpoint: Checkpoint,
    /// Every epoch, including those before a resume.
    pub log: Vec<EpochLog>,
    pub stop: StopReason,
    pub train_windows: usize,
    pub val_windows: usize,
}

fn append<T: Clone>(into: &mut SupervisedSet<T>, from: SupervisedSet<T>) {
    into.inputs.extend(from.inputs);
    into.targets.extend(from.targets);
}

fn fit_typed<T: Scalar>(cfg: &RunConfig, runs: &[RunData], resume: Option<&Checkpoint>) -> CliResult<TrainResult> {
    let p = &cfg.pinn;
    let empty = || SupervisedSet::<T> {
        window_len: p.window_len,
        inputs: Vec::new(),
        targets: Vec::new(),
    };
    let (mut train, mut val) = (empty(), empty());
    let mut dt: Option<T> = None;
    for run in runs {
        let prepared = run.prepare(cfg.calibrate)?;
        let imu: Vec<ImuSample<T>> = prepared.imu.iter().map(ImuSample::cast).collect();
        let gt = prepared.gt.cast::<T>();
        let d = uniform_interval(&imu)?;
        match dt {
            Some(prev) if (prev - d).abs() > prev * T::lit(1e-6) => {
                return Err(CliError::data(format!(
                    "run `{}` is sampled at {} s, earlier runs at {} s",
                    run.name, d, prev
                )))
            }
            _ => dt = Some(d),
        }
        let (t, v) = build_datasets(&imu, &gt, p.window_len, p.stride, p.val_fraction)
            .map_err(|e| CliError::data(format!("run `{}`: {e}", run.name)))?;
        append(&mut train, t);
        append(&mut val, v);
    }
    let dt = dt.ok_or_else(|| CliError::data("no training runs"))?;
    let trainer = Trainer::new(p, &train, &val)?;
    let (model, state, mut log) = match resume {
        Some(ck) => {
            ck.check_architecture(&p.network.architecture())
                .map_err(|e| CliError::usage(e.to_string()))?;
            if ck.window_len != p.window_len || ck.precision != p.precision {
                return Err(CliError::usage(format!(
                    "checkpoint was trained with window {} at {:?}; configuration asks for window {} at {:?}",
                    ck.window_len, ck.precision, p.window_len, p.precision
                )));
            }
            let state = ck
                .train_state::<T>()?
                .ok_or_else(|| CliError::usage("checkpoint holds no training state to resume"))?;
            let log = ck.training.as_ref().map(|t| t.log.clone()).unwrap_or_default();
            (ck.model::<T>()?, state, log)
        }
        None => {
            let (m, s) = trainer.initial(dt)?;
            (m, s, Vec::new())
        }
    };
    let every = (p.epochs / 20).max(1);
    let outcome = trainer.run(&model, state, |r| {
        if r.epoch % every == 0 || r.epoch == 1 {
            log::info!(
                "epoch {:>5}  data {:.3e}  init {:.3e}  phys {:.3e}  total {:.3e}  val {:.3e}  lr {:.1e}",
                r.epoch,
                r.data,
                r.init,
                r.phys,
                r.total,
                r.val_total,
                r.lr
            );
        }
    })?;
    log.extend_from_slice(&outcome.log);
    let mut checkpoint = Checkpoint::from_outcome(p, &outcome);
    if let Some(t) = checkpoint.training.as_mut() {
        t.log = log.clone();
    }
    Ok(TrainResult {
        checkpoint,
        log,
        stop: outcome.stop,
        train_windows: train.num_windows(),
        val_windows: val.num_windows(),
    })
}

/// Trains on `runs`, optionally continuing from `resume`.
pub fn fit(cfg: &RunConfig, runs: &[RunData], resume: Option<&Checkpoint>) -> CliResult<TrainResult> {
    match cfg.pinn.precision {
        Precision::F64 => fit_typed::<f64>(cfg, runs, resume),
        Precision::F32 => fit_typed::<f32>(cfg, runs, resume),
    }
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Writes the checkpoint, epoch log and effective configuration into `out`.
/// A diverged run still leaves its last finite state behind, then fails.
pub fn train(
    cfg: &RunConfig,
    runs: &[RunData],
    resume: Option<&Checkpoint>,
    out: &Path,
    reproducible: bool,
) -> CliResult<TrainResult> {
    ensure_dir(out)?;
    let result = fit(cfg, runs, resume)?;
    let created = (!reproducible).then(unix_now);
    result
        .checkpoint
        .clone()
        .with_created(created)
        .write(out.join(CHECKPOINT_FILE))?;
    write_epoch_log(&out.join(EPOCH_LOG_FILE), &result.log)?;
    write_text(&out.join(RUN_CONFIG_FILE), &cfg.to_toml())?;
    if let StopReason::Diverged { epoch, message } = &result.stop {
        let text = format!(
            "training diverged in epoch {epoch}: {message}\nthe checkpoint holds the state after epoch {}\n",
            epoch - 1
        );
        write_text(&out.join(DIAGNOSTIC_FILE), &text)?;
        return Err(CliError::Numerical(format!(
            "training diverged in epoch {epoch}: {message}"
        )));
    }
    Ok(result)
}
