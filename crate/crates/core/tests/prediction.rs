//! Window chaining, truth anchoring and the consistency bound.

mod common;

use common::*;
use morpi::metrics::{align, ate};
use morpi::ndiff::{Architecture, Network};
use morpi::pinn::{
    build_datasets, predict_trajectory, train, Anchoring, HeadingSource, PinnConfig, PinnModel, PredictOptions,
};
use morpi::preprocess::prepare;
use morpi::{ImuSample, NavState};

const DT: f64 = 1.0 / 120.0;

fn zero_head_model(window_len: usize) -> PinnModel {
    let arch = Architecture::mlp(4, 2, 8, 5);
    let mut network = Network::new(arch, 3).unwrap();
    let head = network.params.layers.last_mut().unwrap();
    head.weight.as_mut_slice().fill(0.0);
    head.bias.fill(0.0);
    PinnModel::with_identity_stats(network, window_len, DT).unwrap()
}

fn still_imu(n: usize) -> Vec<ImuSample> {
    (0..n)
        .map(|k| ImuSample {
            t: k as f64 * DT,
            fx: 0.3,
            fy: -0.1,
            omega_z: 0.0,
        })
        .collect()
}

#[test]
fn zero_head_keeps_the_anchor_state() {
    let model = zero_head_model(10);
    let start = NavState {
        t: 0.0,
        x: 4.0,
        y: -2.0,
        vx: 0.0,
        vy: 0.0,
        psi: 0.7,
    };
    for heading in [
        HeadingSource::Integrated,
        HeadingSource::Velocity,
        HeadingSource::Network,
    ] {
        let options = PredictOptions {
            heading,
            ..PredictOptions::default()
        };
        let pred = predict_trajectory(&model, &still_imu(95), &start, Anchoring::Chained, options).unwrap();
        assert_eq!(pred.trajectory.len(), 95);
        for (k, s) in pred.trajectory.states().iter().enumerate() {
            assert_eq!((s.x, s.y, s.vx, s.vy), (4.0, -2.0, 0.0, 0.0));
            assert!((s.psi - 0.7).abs() < 1e-15);
            assert!((s.t - k as f64 * DT).abs() < 1e-12);
        }
        assert!(!pred.extrapolated);
    }
}

#[test]
fn integrated_heading_follows_the_gyro() {
    let model = zero_head_model(5);
    let imu: Vec<_> = still_imu(41)
        .into_iter()
        .map(|s| ImuSample { omega_z: 0.25, ..s })
        .collect();
    let pred = predict_trajectory(
        &model,
        &imu,
        &NavState::at_rest(0.0, 0.0, 0.0, 0.0),
        Anchoring::Chained,
        PredictOptions::default(),
    )
    .unwrap();
    // anchors at samples 0, 4, 8, …; every state inherits its window's anchor heading
    for (k, s) in pred.trajectory.states().iter().enumerate() {
        let anchor = (k.min(39) / 4 * 4) as f64 * DT * 0.25;
        assert!((s.psi - anchor).abs() < 1e-12, "sample {k}");
    }
}

#[test]
fn out_of_range_inputs_raise_the_extrapolation_flag() {
    let model = zero_head_model(6);
    let mut imu = still_imu(30);
    imu[17].fx = 25.0;
    let pred = predict_trajectory(
        &model,
        &imu,
        &NavState::at_rest(0.0, 0.0, 0.0, 0.0),
        Anchoring::Chained,
        PredictOptions::default(),
    )
    .unwrap();
    assert!(pred.extrapolated);
    assert_eq!(pred.max_abs_z, 25.0);
}

#[test]
fn truth_anchored_error_is_bounded_by_the_data_loss() {
    let w = 12;
    let s = snake_scenario(20.0, 50.0);
    let run = s.simulate_run(0).unwrap();
    let p = prepare(&run.imu, &run.gt, run.role.default_stationary(), true).unwrap();
    let config = PinnConfig {
        epochs: 4,
        window_len: w,
        stride: 6,
        phys_batch: Some(128),
        ..PinnConfig::smoke()
    };
    let (train_set, val_set) = build_datasets(&p.imu, &p.gt, w, 6, 0.1).unwrap();
    let model = train(&config, &train_set, &val_set, DT).unwrap().model;

    // whole non-overlapping tiles inside the ground-truth span
    let gt_end = p.gt.last().unwrap().t;
    let usable = p.imu.iter().take_while(|u| u.t <= gt_end + 1e-9).count();
    let n = (usable / (w - 1)) * (w - 1);
    let imu = &p.imu[..n];
    let (tiles, _) = build_datasets(imu, &p.gt, w - 1, w - 1, 0.0).unwrap();
    assert_eq!(tiles.inputs.len(), n);
    let data = model.data_loss_on(&tiles).unwrap();

    let pred = predict_trajectory(
        &model,
        imu,
        &p.initial,
        Anchoring::Truth(&p.gt),
        PredictOptions::default(),
    )
    .unwrap();
    let (g, e) = align(&p.gt, &pred.trajectory).unwrap();
    assert_eq!(e.len(), n);
    let a = ate(&g, &e).unwrap();
    assert!(a * a <= data * (1.0 + 1e-9), "ATE² {} above data loss {data}", a * a);
}

#[test]
fn prediction_is_deterministic_and_ignores_dropout() {
    let arch = Architecture::mlp(4, 2, 8, 5).with_dropout(0.5);
    let model = PinnModel::with_identity_stats(Network::new(arch, 8).unwrap(), 7, DT).unwrap();
    let imu = still_imu(50);
    let start = NavState::at_rest(0.0, 1.0, 2.0, 0.3);
    let run = || {
        predict_trajectory(&model, &imu, &start, Anchoring::Chained, PredictOptions::default())
            .unwrap()
            .trajectory
    };
    assert_eq!(run(), run());
}
