//! Training loop behaviour on synthetic and simulated data.

mod common;

use common::*;
use morpi::pinn::{
    train, Checkpoint, LossWeights, NetworkConfig, PinnConfig, StateModel, StopReason, SupervisedSet, Trainer,
};

const DT: f64 = 1.0 / 120.0;

fn small(depth: usize, width: usize) -> NetworkConfig {
    NetworkConfig {
        depth,
        width,
        ..NetworkConfig::default()
    }
}

fn linear_set() -> SupervisedSet<f64> {
    let inputs = random_inputs(64, 5);
    let targets = inputs
        .iter()
        .map(|u| {
            [
                0.5 * u[0] + 0.2 * u[1] - 0.1,
                -0.3 * u[2] + 0.4 * u[3],
                u[1] - u[2] + 0.2,
                0.7 * u[3] + 0.1 * u[0],
                -0.2 * u[1] + 0.05,
            ]
        })
        .collect();
    SupervisedSet {
        window_len: 8,
        inputs,
        targets,
    }
}

fn empty(window_len: usize) -> SupervisedSet<f64> {
    SupervisedSet {
        window_len,
        inputs: Vec::new(),
        targets: Vec::new(),
    }
}

#[test]
fn zero_epochs_returns_initial_model_and_empty_log() {
    let set = linear_set();
    let config = PinnConfig {
        epochs: 0,
        ..PinnConfig::smoke()
    };
    let none = empty(8);
    let trainer = Trainer::new(&config, &set, &none).unwrap();
    let (model, state) = trainer.initial(DT).unwrap();
    let out = trainer.run(&model, state, |_| {}).unwrap();
    assert!(out.log.is_empty());
    assert_eq!(out.stop, StopReason::EpochBudget);
    assert_eq!(out.model, model);
}

#[test]
fn overfits_a_small_linear_target() {
    let set = linear_set();
    let config = PinnConfig {
        epochs: 200,
        batch_size: 8,
        loss: LossWeights::new(1.0, 0.0, 0.0).unwrap(),
        optimizer: morpi::ndiff::AdamConfig {
            lr: 1e-2,
            ..Default::default()
        },
        network: NetworkConfig {
            dropout: 0.0,
            ..small(2, 16)
        },
        ..PinnConfig::default()
    };
    let none = empty(8);
    let trainer = Trainer::new(&config, &set, &none).unwrap();
    let (model, state) = trainer.initial(DT).unwrap();
    let initial = model.data_loss_on(&set).unwrap();
    let out = trainer.run(&model, state, |_| {}).unwrap();
    let last = out.log.last().unwrap();
    let fin = out.model.data_loss_on(&set).unwrap();
    assert!(fin < 0.01 * initial, "data loss {initial} → {fin} (log {last:?})");
}

#[test]
fn validation_loss_improves_tenfold_on_snake_training() {
    let (train_set, val_set) = snake_sets(60.0, 50.0, 12, 4);
    let config = PinnConfig {
        epochs: 15,
        stride: 4,
        phys_batch: Some(256),
        network: small(3, 32),
        ..PinnConfig::default()
    };
    let out = train(&config, &train_set, &val_set, DT).unwrap();
    let first = out.log[0].val_total;
    let best = out.log.iter().map(|r| r.val_total).fold(f64::INFINITY, f64::min);
    assert!(first / best >= 10.0, "validation total {first} → {best}");
    assert_eq!(out.state.best_val, best);
}

#[test]
fn log_rows_satisfy_weighted_sum() {
    let (train_set, val_set) = snake_sets(20.0, 50.0, 12, 6);
    let config = PinnConfig {
        epochs: 4,
        loss: LossWeights::new(0.8, 1.7, 0.3).unwrap(),
        phys_batch: Some(128),
        ..PinnConfig::smoke()
    };
    let out = train(&config, &train_set, &val_set, DT).unwrap();
    assert_eq!(out.log.len(), 4);
    for (i, r) in out.log.iter().enumerate() {
        assert_eq!(r.epoch, i + 1);
        let expect = 0.8 * r.data + 1.7 * r.init + 0.3 * r.phys;
        assert!((r.total - expect).abs() <= 1e-12 * expect.abs(), "{r:?}");
        assert!(r.lr > 0.0 && r.val_total.is_finite());
    }
}

#[test]
fn physics_free_training_fits_noise_free_data_at_least_as_well() {
    let (train_set, val_set) = snake_sets(20.0, 0.0, 12, 6);
    let base = PinnConfig {
        epochs: 15,
        phys_batch: Some(128),
        network: NetworkConfig {
            dropout: 0.0,
            ..small(2, 16)
        },
        ..PinnConfig::default()
    };
    let without = PinnConfig {
        loss: LossWeights::new(1.0, 1.0, 0.0).unwrap(),
        ..base.clone()
    };
    let full = train(&base, &train_set, &val_set, DT).unwrap();
    let plain = train(&without, &train_set, &val_set, DT).unwrap();
    let d_full = full.model.data_loss_on(&train_set).unwrap();
    let d_plain = plain.model.data_loss_on(&train_set).unwrap();
    assert!(d_plain <= d_full, "without physics {d_plain}, with physics {d_full}");
}

#[test]
fn training_is_deterministic() {
    let (train_set, val_set) = snake_sets(15.0, 50.0, 12, 6);
    let config = PinnConfig {
        epochs: 3,
        phys_batch: Some(64),
        ..PinnConfig::smoke()
    };
    let a = train(&config, &train_set, &val_set, DT).unwrap();
    let b = train(&config, &train_set, &val_set, DT).unwrap();
    assert_eq!(a.log, b.log);
    assert_eq!(a.state, b.state);
    assert_eq!(a.model, b.model);
}

#[test]
fn resuming_from_a_checkpoint_continues_identically() {
    let (train_set, val_set) = snake_sets(15.0, 50.0, 12, 6);
    let config = PinnConfig {
        epochs: 6,
        phys_batch: Some(64),
        ..PinnConfig::smoke()
    };
    let straight = train(&config, &train_set, &val_set, DT).unwrap();

    let half = PinnConfig {
        epochs: 3,
        ..config.clone()
    };
    let first = train(&half, &train_set, &val_set, DT).unwrap();
    let text = Checkpoint::from_outcome(&half, &first).to_text();
    let ckpt = Checkpoint::parse(&text).unwrap();
    let state = ckpt.train_state::<f64>().unwrap().unwrap();
    assert_eq!(state, first.state);
    assert_eq!(state.epoch, 3);

    let trainer = Trainer::new(&config, &train_set, &val_set).unwrap();
    let model = ckpt.model::<f64>().unwrap();
    let second = trainer.run(&model, state, |_| {}).unwrap();
    assert_eq!(second.log.first().unwrap().epoch, 4);
    let joined: Vec<_> = first.log.iter().chain(&second.log).copied().collect();
    assert_eq!(joined, straight.log);
    assert_eq!(second.state, straight.state);
    assert_eq!(second.model, straight.model);
}

#[test]
fn non_finite_loss_stops_with_last_finite_state() {
    let mut set = linear_set();
    set.targets[3][1] = f64::NAN;
    // statistics come from a clean copy so the model itself stays finite
    let clean = linear_set();
    let config = PinnConfig {
        epochs: 5,
        ..PinnConfig::smoke()
    };
    let trainer = Trainer::new(&config, &set, &clean).unwrap();
    let (model, state) = Trainer::new(&config, &clean, &clean).unwrap().initial(DT).unwrap();
    let initial_params = state.params.clone();
    let out = trainer.run(&model, state, |_| {}).unwrap();
    assert!(
        matches!(out.stop, StopReason::Diverged { epoch: 1, .. }),
        "{:?}",
        out.stop
    );
    assert!(out.log.is_empty());
    assert_eq!(out.state.params, initial_params);
    assert!(out
        .model
        .states(&clean.inputs)
        .unwrap()
        .iter()
        .flatten()
        .all(|v| v.is_finite()));
}

#[test]
fn single_precision_training_runs() {
    use morpi::pinn::{build_datasets, Precision};
    use morpi::preprocess::prepare;
    let s = snake_scenario(10.0, 50.0);
    let run = s.simulate_run(0).unwrap();
    let imu: Vec<morpi::ImuSample<f32>> = run.imu.iter().map(|u| u.cast()).collect();
    let p = prepare(&imu, &run.gt.cast::<f32>(), 60.0, true).unwrap();
    let (train_set, val_set) = build_datasets(&p.imu, &p.gt, 12, 6, 0.1).unwrap();
    let config = PinnConfig {
        epochs: 3,
        precision: Precision::F32,
        phys_batch: Some(64),
        ..PinnConfig::smoke()
    };
    let out = train(&config, &train_set, &val_set, 1.0f32 / 120.0).unwrap();
    assert_eq!(out.log.len(), 3);
    assert!(out.log.iter().all(|r| r.total.is_finite() && r.val_total.is_finite()));
    assert!(out.log[2].val_total < out.log[0].val_total);
}
