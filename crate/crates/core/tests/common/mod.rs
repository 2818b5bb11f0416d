#![allow(dead_code)]

use morpi::ndiff::{Architecture, Network};
use morpi::normalize::AxisStats;
use morpi::pinn::{InitSet, Input, PinnModel, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Toy architectures with at most three layers of at most eight units.
pub fn toy_architectures() -> Vec<Architecture> {
    vec![
        Architecture::mlp(4, 1, 8, 5).with_layer_norm(false),
        Architecture::mlp(4, 2, 6, 5),
        Architecture::mlp(4, 2, 8, 5).with_layer_norm(false),
        Architecture::mlp(4, 1, 5, 5),
        Architecture::mlp(4, 2, 4, 5).with_dropout(0.25),
    ]
}

/// A model with non-trivial weights, biases and normalization statistics.
pub fn toy_model(arch: Architecture, seed: u64) -> PinnModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
    let mut network = Network::new(arch, seed).unwrap();
    for p in network.params.iter_mut() {
        *p += rng.random_range(-0.3..0.3);
    }
    let mut stat = || AxisStats {
        mean: rng.random_range(-0.5..0.5),
        std: rng.random_range(0.3..2.0),
    };
    PinnModel {
        network,
        input_stats: std::array::from_fn(|_| stat()),
        output_stats: std::array::from_fn(|_| stat()),
        window_len: 6,
        sample_interval: 0.01,
    }
}

pub fn random_inputs(n: usize, seed: u64) -> Vec<Input<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            [
                rng.random_range(0.0..0.05),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-0.5..0.5),
            ]
        })
        .collect()
}

pub fn random_targets(n: usize, seed: u64) -> Vec<State<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn toy_init(seed: u64) -> InitSet<f64> {
    let first = random_inputs(1, seed)[0];
    InitSet::repeat([0.0, first[1], first[2], first[3]], 7, [0.1, -0.2])
}

use morpi::pinn::{build_datasets, SupervisedSet};
use morpi::preprocess::prepare;
use morpi::simulator::Scenario;

/// A single calibrated, trimmed training snake.
pub fn snake_scenario(duration: f64, error_scale: f64) -> Scenario {
    Scenario::from_toml(&format!(
        r#"
seed = 11
error_scale = {error_scale}

[[run]]
name = "snake-train"
role = "train"
kind = "snake"
speed = 1.0
heading_amp = 0.6
heading_period = 4.0
duration = {duration}
"#
    ))
    .unwrap()
}

pub fn snake_sets(
    duration: f64,
    error_scale: f64,
    window_len: usize,
    stride: usize,
) -> (SupervisedSet<f64>, SupervisedSet<f64>) {
    let s = snake_scenario(duration, error_scale);
    let run = s.simulate_run(0).unwrap();
    let p = prepare(&run.imu, &run.gt, run.role.default_stationary(), true).unwrap();
    build_datasets(&p.imu, &p.gt, window_len, stride, 0.1).unwrap()
}
