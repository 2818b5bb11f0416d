use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::params::Params;

/// Adam hyperparameters with decoupled weight decay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-4,
        }
    }
}

/// Plateau learning-rate schedule and early stopping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    pub factor: f64,
    /// Stagnant epochs tolerated before the rate is cut.
    pub patience: usize,
    /// Minimum relative improvement of the validation loss.
    pub threshold: f64,
    pub early_stop_patience: usize,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            factor: 0.5,
            patience: 50,
            threshold: 1e-4,
            early_stop_patience: 100,
        }
    }
}

/// Moments, step counter, learning rate and plateau bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState<T> {
    pub adam: AdamConfig,
    pub scheduler: SchedulerConfig,
    pub m: Params<T>,
    pub v: Params<T>,
    pub step: u64,
    /// Current learning rate.
    pub lr: f64,
    pub best_loss: f64,
    /// Epochs since the last improvement, reset on every rate cut.
    pub plateau_epochs: usize,
    /// Epochs since the last improvement, never reset by rate cuts.
    pub stale_epochs: usize,
    pub stop: bool,
}

/// What one scheduler step decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchedulerEvent {
    pub improved: bool,
    pub lr_reduced: bool,
    pub stop: bool,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(params: &Params<T>, adam: AdamConfig, scheduler: SchedulerConfig) -> Self {
        Self {
            adam,
            scheduler,
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
            lr: adam.lr,
            best_loss: f64::INFINITY,
            plateau_epochs: 0,
            stale_epochs: 0,
            stop: false,
        }
    }

    pub fn cast<U: Scalar>(&self) -> OptimizerState<U> {
        OptimizerState {
            adam: self.adam,
            scheduler: self.scheduler,
            m: self.m.cast(),
            v: self.v.cast(),
            step: self.step,
            lr: self.lr,
            best_loss: self.best_loss,
            plateau_epochs: self.plateau_epochs,
            stale_epochs: self.stale_epochs,
            stop: self.stop,
        }
    }
}

/// One bias-corrected Adam update followed by `params ← params·(1 − η·wd)`.
/// A non-finite gradient leaves everything untouched.
pub fn adam_step<T: Scalar>(state: &mut OptimizerState<T>, params: &mut Params<T>, grads: &Params<T>) -> Result<()> {
    if params.layers.len() != grads.layers.len() || params.len() != grads.len() || state.m.len() != params.len() {
        return Err(Error::Shape("parameter, gradient and moment shapes disagree".into()));
    }
    if let Some(layer) = grads.layers.iter().position(|g| !g.iter().all(|v| v.is_finite())) {
        return Err(Error::NonFinite {
            what: "gradient",
            layer: Some(layer),
        });
    }
    let c = state.adam;
    let t = state.step + 1;
    let bc1 = T::lit(1.0 - c.beta1.powf(t as f64));
    let bc2 = T::lit(1.0 - c.beta2.powf(t as f64));
    let (b1, b2) = (T::lit(c.beta1), T::lit(c.beta2));
    let (lr, eps) = (T::lit(state.lr), T::lit(c.eps));
    let decay = T::lit(1.0 - state.lr * c.weight_decay);
    let one = T::one();

    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads.iter())
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = b1 * *m + (one - b1) * g;
        *v = b2 * *v + (one - b2) * g * g;
        let mh = *m / bc1;
        let vh = *v / bc2;
        *p = (*p - lr * mh / (vh.sqrt() + eps)) * decay;
    }
    state.step = t;
    Ok(())
}

/// Feeds one epoch's validation loss to the plateau schedule.
pub fn scheduler_step<T>(state: &mut OptimizerState<T>, validation_loss: f64) -> Result<SchedulerEvent> {
    if !validation_loss.is_finite() {
        return Err(Error::NonFinite {
            what: "validation loss",
            layer: None,
        });
    }
    let sc = state.scheduler;
    let improved =
        !state.best_loss.is_finite() || validation_loss < state.best_loss - sc.threshold * state.best_loss.abs();
    let mut lr_reduced = false;
    if improved {
        state.best_loss = validation_loss;
        state.plateau_epochs = 0;
        state.stale_epochs = 0;
    } else {
        state.plateau_epochs += 1;
        state.stale_epochs += 1;
        if state.plateau_epochs > sc.patience {
            state.lr *= sc.factor;
            state.plateau_epochs = 0;
            lr_reduced = true;
        }
        if state.stale_epochs >= sc.early_stop_patience {
            state.stop = true;
        }
    }
    Ok(SchedulerEvent {
        improved,
        lr_reduced,
        stop: state.stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndiff::{Architecture, LayerParams, Matrix};

    fn scalar_params(v: f64) -> Params<f64> {
        Params {
            layers: vec![LayerParams {
                weight: Matrix::from_vec(1, 1, vec![v]),
                bias: vec![],
                gain: vec![],
                offset: vec![],
            }],
        }
    }

    #[test]
    fn zero_gradient_without_decay_is_identity() {
        let arch = Architecture::mlp(4, 2, 8, 5);
        let mut p = Params::<f64>::init(&arch, 3);
        let before = p.clone();
        let adam = AdamConfig {
            weight_decay: 0.0,
            ..Default::default()
        };
        let mut st = OptimizerState::new(&p, adam, SchedulerConfig::default());
        let g = p.zeros_like();
        for _ in 0..5 {
            adam_step(&mut st, &mut p, &g).unwrap();
        }
        assert_eq!(p, before);
        assert_eq!(st.step, 5);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = scalar_params(0.5);
        let adam = AdamConfig {
            weight_decay: 0.0,
            ..Default::default()
        };
        let mut st = OptimizerState::new(&p, adam, SchedulerConfig::default());
        adam_step(&mut st, &mut p, &scalar_params(1.0)).unwrap();
        let moved = 0.5 - p.flatten()[0];
        assert!((moved - 0.001).abs() < 1e-10, "{moved}");
    }

    #[test]
    fn decoupled_decay_multiplies_parameters() {
        let mut p = scalar_params(2.0);
        let mut st = OptimizerState::new(&p, AdamConfig::default(), SchedulerConfig::default());
        adam_step(&mut st, &mut p, &scalar_params(0.0)).unwrap();
        assert_eq!(p.flatten()[0], 2.0 * (1.0 - 1e-7));
    }

    #[test]
    fn non_finite_gradient_names_layer_and_changes_nothing() {
        let arch = Architecture::mlp(4, 2, 3, 5);
        let mut p = Params::<f64>::init(&arch, 1);
        let before = p.clone();
        let mut st = OptimizerState::new(&p, AdamConfig::default(), SchedulerConfig::default());
        let mut g = p.zeros_like();
        g.layers[2].bias[1] = f64::INFINITY;
        let err = adam_step(&mut st, &mut p, &g).unwrap_err();
        assert!(matches!(err, Error::NonFinite { layer: Some(2), .. }));
        assert_eq!(p, before);
        assert_eq!(st.step, 0);
    }

    fn state() -> OptimizerState<f64> {
        OptimizerState::new(&scalar_params(0.0), AdamConfig::default(), SchedulerConfig::default())
    }

    #[test]
    fn decreasing_losses_keep_rate() {
        let mut st = state();
        for k in 0..300 {
            let ev = scheduler_step(&mut st, 1.0 / (1.0 + k as f64)).unwrap();
            assert!(ev.improved && !ev.lr_reduced && !ev.stop);
        }
        assert_eq!(st.lr, 1e-3);
    }

    #[test]
    fn plateau_halves_rate_once_on_fifty_first_stagnant_epoch() {
        let mut st = state();
        scheduler_step(&mut st, 1.0).unwrap();
        for k in 1..=50 {
            let ev = scheduler_step(&mut st, 1.0).unwrap();
            assert!(!ev.lr_reduced, "epoch {k}");
        }
        assert_eq!(st.lr, 1e-3);
        assert!(scheduler_step(&mut st, 1.0).unwrap().lr_reduced);
        assert_eq!(st.lr, 5e-4);
        assert_eq!(st.plateau_epochs, 0);
    }

    #[test]
    fn early_stop_after_patience() {
        let mut st = state();
        scheduler_step(&mut st, 1.0).unwrap();
        for _ in 0..99 {
            assert!(!scheduler_step(&mut st, 1.0).unwrap().stop);
        }
        assert!(scheduler_step(&mut st, 1.0).unwrap().stop);
        assert_eq!(st.lr, 5e-4);
    }

    #[test]
    fn tiny_relative_gains_are_not_improvements() {
        let mut st = state();
        scheduler_step(&mut st, 1.0).unwrap();
        assert!(!scheduler_step(&mut st, 1.0 - 5e-5).unwrap().improved);
        assert!(scheduler_step(&mut st, 1.0 - 2e-4).unwrap().improved);
    }

    #[test]
    fn non_finite_validation_loss_is_rejected() {
        assert!(scheduler_step(&mut state(), f64::NAN).is_err());
    }
}
