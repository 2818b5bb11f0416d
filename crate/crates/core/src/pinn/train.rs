use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndiff::{adam_step, scheduler_step, OptimizerState, Params};
use crate::scalar::Scalar;
use crate::strapdown::GravityPlanar;

use super::config::PinnConfig;
use super::data::{sample_collocation, CollocationSet, InitSet, SupervisedSet};
use super::loss::{total_loss, Input, LossBreakdown, State};
use super::model::{DropoutPlan, ObjectiveBatch, PinnModel};

/// One row of the epoch log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub data: f64,
    pub init: f64,
    pub phys: f64,
    pub total: f64,
    pub val_total: f64,
    /// Learning rate used during the epoch.
    pub lr: f64,
}

impl EpochLog {
    pub const CSV_HEADER: &'static str = "epoch,data,init,phys,total,val_total,lr";

    pub fn breakdown(&self) -> LossBreakdown {
        LossBreakdown {
            data: self.data,
            init: self.init,
            phys: self.phys,
            total: self.total,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum StopReason {
    EpochBudget,
    EarlyStop,
    Converged,
    /// A loss or gradient went non-finite; the last finite state was kept.
    Diverged {
        epoch: usize,
        message: String,
    },
}

/// Resumable trainer state.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainState<T> {
    /// Completed epochs.
    pub epoch: usize,
    pub params: Params<T>,
    pub optimizer: OptimizerState<T>,
    pub best_params: Params<T>,
    pub best_val: f64,
    pub prev_total: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    /// Best-validation model.
    pub model: PinnModel<T>,
    pub state: TrainState<T>,
    pub log: Vec<EpochLog>,
    pub stop: StopReason,
}

/// Training loop over fixed supervised, collocation and initial-condition sets.
pub struct Trainer<'a, T> {
    pub config: &'a PinnConfig,
    pub train: &'a SupervisedSet<T>,
    pub val: &'a SupervisedSet<T>,
    pub collocation: CollocationSet<T>,
    pub init: InitSet<T>,
    gravity: GravityPlanar<T>,
}

fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

impl<'a, T: Scalar> Trainer<'a, T> {
    pub fn new(config: &'a PinnConfig, train: &'a SupervisedSet<T>, val: &'a SupervisedSet<T>) -> Result<Self> {
        config.validate()?;
        if train.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if !val.is_empty() && val.window_len != train.window_len {
            return Err(Error::Shape("training and validation windows differ in length".into()));
        }
        let collocation = sample_collocation(&train.inputs, config.n_phys, config.seed.wrapping_add(1))?;
        let init = InitSet::repeat(train.inputs[0], config.n_ic, [T::zero(); 2]);
        Ok(Self {
            config,
            train,
            val,
            collocation,
            init,
            gravity: config.gravity.cast(),
        })
    }

    /// Freshly initialized model and optimizer.
    pub fn initial(&self, sample_interval: T) -> Result<(PinnModel<T>, TrainState<T>)> {
        let model = PinnModel::for_training(
            self.config.network.architecture(),
            self.config.seed,
            self.train,
            sample_interval,
        )?;
        let params = model.network.params.clone();
        let state = TrainState {
            epoch: 0,
            optimizer: OptimizerState::new(&params, self.config.optimizer, self.config.scheduler),
            best_params: params.clone(),
            params,
            best_val: f64::INFINITY,
            prev_total: None,
        };
        Ok((model, state))
    }

    /// Continues from `state` until the configured epoch budget, early stop,
    /// convergence or divergence. `model` supplies architecture and statistics.
    pub fn run(
        &self,
        model: &PinnModel<T>,
        mut state: TrainState<T>,
        mut on_epoch: impl FnMut(&EpochLog),
    ) -> Result<TrainOutcome<T>> {
        let cfg = self.config;
        model.validate()?;
        state.params.validate(&model.network.arch)?;
        let mut work = model.clone();
        let mut log = Vec::new();
        let mut stop = StopReason::EpochBudget;
        let n_windows = self.train.num_windows();
        let w = self.train.window_len;
        let drop_data = work.network.arch.dropout > 0.0;

        let finish = |state: TrainState<T>, log, stop| {
            let mut best = model.clone();
            best.network.params = state.best_params.clone();
            Ok(TrainOutcome {
                model: best,
                state,
                log,
                stop,
            })
        };

        if state.optimizer.stop {
            return finish(state, log, StopReason::EarlyStop);
        }
        while state.epoch < cfg.epochs {
            let epoch = state.epoch + 1;
            let snapshot = state.clone();
            let lr = state.optimizer.lr;
            match self.epoch(&mut work, &mut state, epoch, n_windows, w, drop_data) {
                Ok(parts) => {
                    let val_total = match self.validation_total(&work) {
                        Ok(v) if v.is_finite() => v,
                        Ok(v) => {
                            let msg = format!("validation loss became {v}");
                            return finish(snapshot, log, StopReason::Diverged { epoch, message: msg });
                        }
                        Err(e) => return Err(e),
                    };
                    let ev = scheduler_step(&mut state.optimizer, val_total)?;
                    if ev.improved {
                        state.best_params = state.params.clone();
                        state.best_val = val_total;
                    }
                    state.epoch = epoch;
                    let row = EpochLog {
                        epoch,
                        data: parts.data,
                        init: parts.init,
                        phys: parts.phys,
                        total: parts.total,
                        val_total,
                        lr,
                    };
                    on_epoch(&row);
                    log.push(row);
                    let converged = state
                        .prev_total
                        .is_some_and(|p| (parts.total - p).abs() < cfg.convergence_eps);
                    state.prev_total = Some(parts.total);
                    if converged {
                        stop = StopReason::Converged;
                        break;
                    }
                    if ev.stop {
                        stop = StopReason::EarlyStop;
                        break;
                    }
                }
                Err(e) if e.is_numerical() => {
                    let msg = e.to_string();
                    return finish(snapshot, log, StopReason::Diverged { epoch, message: msg });
                }
                Err(e) => return Err(e),
            }
        }
        finish(state, log, stop)
    }

    /// One pass over the shuffled training windows. Returns mean components.
    fn epoch(
        &self,
        work: &mut PinnModel<T>,
        state: &mut TrainState<T>,
        epoch: usize,
        n_windows: usize,
        w: usize,
        drop_data: bool,
    ) -> Result<LossBreakdown<f64>> {
        let cfg = self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(epoch_seed(cfg.seed, epoch));
        let mut order: Vec<usize> = (0..n_windows).collect();
        order.shuffle(&mut rng);
        let n_colloc = self.collocation.points.len();
        let phys_k = cfg.phys_batch.map_or(n_colloc, |k| k.min(n_colloc));

        let mut sums = [0.0f64; 3];
        let mut steps = 0usize;
        let mut inputs: Vec<Input<T>> = Vec::with_capacity(cfg.batch_size * w);
        let mut targets: Vec<State<T>> = Vec::with_capacity(cfg.batch_size * w);
        let mut colloc: Vec<Input<T>> = Vec::with_capacity(phys_k);
        for chunk in order.chunks(cfg.batch_size) {
            inputs.clear();
            targets.clear();
            for &k in chunk {
                let rows = self.train.window_rows(k);
                inputs.extend_from_slice(&self.train.inputs[rows.clone()]);
                targets.extend_from_slice(&self.train.targets[rows]);
            }
            let colloc_slice: &[Input<T>] = if phys_k < n_colloc {
                colloc.clear();
                colloc.extend(
                    index::sample(&mut rng, n_colloc, phys_k)
                        .into_iter()
                        .map(|i| self.collocation.points[i]),
                );
                &colloc
            } else {
                &self.collocation.points
            };
            let plan = DropoutPlan {
                seed: rng.random(),
                data: drop_data,
                physics: drop_data && cfg.dropout_on_physics,
            };
            work.network.params = std::mem::replace(&mut state.params, Params { layers: Vec::new() });
            let batch = ObjectiveBatch {
                data_inputs: &inputs,
                data_targets: &targets,
                init: &self.init,
                collocation: colloc_slice,
            };
            let result = work.objective(&batch, &cfg.loss, &self.gravity, plan, true);
            let step = result.and_then(|(parts, grads)| {
                if !parts.is_finite() {
                    return Err(Error::NonFinite {
                        what: "training loss",
                        layer: None,
                    });
                }
                let grads = grads.expect("gradient requested");
                adam_step(&mut state.optimizer, &mut work.network.params, &grads)?;
                Ok(parts)
            });
            state.params = work.network.params.clone();
            let parts = step?;
            sums[0] += parts.data.to_f64_lossy();
            sums[1] += parts.init.to_f64_lossy();
            sums[2] += parts.phys.to_f64_lossy();
            steps += 1;
        }
        let n = steps.max(1) as f64;
        Ok(total_loss(sums[0] / n, sums[1] / n, sums[2] / n, &cfg.loss))
    }

    /// Weighted objective on the validation windows with the full collocation
    /// and initial-condition sets, dropout off.
    fn validation_total(&self, work: &PinnModel<T>) -> Result<f64> {
        let set = if self.val.is_empty() { self.train } else { self.val };
        let data = work.data_loss_on(set)?;
        let (init, phys) = work.init_and_physics_loss(&self.init, &self.collocation.points, &self.gravity)?;
        let parts = total_loss(data, init, phys, &self.config.loss);
        Ok(parts.total.to_f64_lossy())
    }
}

/// Trains a fresh model on `train`, scheduling on `val`.
pub fn train<T: Scalar>(
    config: &PinnConfig,
    train: &SupervisedSet<T>,
    val: &SupervisedSet<T>,
    sample_interval: T,
) -> Result<TrainOutcome<T>> {
    let trainer = Trainer::new(config, train, val)?;
    let (model, state) = trainer.initial(sample_interval)?;
    trainer.run(&model, state, |_| {})
}
