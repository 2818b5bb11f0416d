//! Parameter gradients of every objective term against central differences.

mod common;

use common::*;
use morpi::ndiff::Params;
use morpi::pinn::{DropoutPlan, LossWeights, ObjectiveBatch, PinnModel};
use morpi::strapdown::GravityPlanar;

const H: f64 = 1e-5;
const REL: f64 = 1e-4;

fn objective(model: &PinnModel, batch: &ObjectiveBatch<'_, f64>, w: &LossWeights, plan: DropoutPlan) -> f64 {
    let g = GravityPlanar { gx: 0.05, gy: -0.02 };
    model.objective(batch, w, &g, plan, false).unwrap().0.total
}

fn check(model: &PinnModel, batch: &ObjectiveBatch<'_, f64>, w: &LossWeights, plan: DropoutPlan) -> f64 {
    let g = GravityPlanar { gx: 0.05, gy: -0.02 };
    let (_, grads) = model.objective(batch, w, &g, plan, true).unwrap();
    let analytic = grads.unwrap().flatten();
    let base = model.network.params.flatten();
    let arch = &model.network.arch;
    let mut worst = 0.0f64;
    for (k, &a) in analytic.iter().enumerate() {
        let mut probe = model.clone();
        let mut flat = base.clone();
        flat[k] = base[k] + H;
        probe.network.params = Params::unflatten(arch, &flat).unwrap();
        let up = objective(&probe, batch, w, plan);
        flat[k] = base[k] - H;
        probe.network.params = Params::unflatten(arch, &flat).unwrap();
        let down = objective(&probe, batch, w, plan);
        let fd = (up - down) / (2.0 * H);
        let err = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
        assert!(
            err < REL,
            "parameter {k}: analytic {a:e}, finite difference {fd:e}, relative error {err:e}"
        );
        worst = worst.max(err);
    }
    worst
}

fn weight_sets() -> Vec<(&'static str, LossWeights)> {
    vec![
        ("data", LossWeights::new(1.0, 0.0, 0.0).unwrap()),
        ("init", LossWeights::new(0.0, 1.0, 0.0).unwrap()),
        ("physics", LossWeights::new(0.0, 0.0, 1.0).unwrap()),
        ("total", LossWeights::default()),
    ]
}

#[test]
fn every_term_matches_central_differences_on_toy_networks() {
    for (i, arch) in toy_architectures().into_iter().enumerate() {
        let seed = 100 + i as u64;
        let dropout = arch.dropout > 0.0;
        let model = toy_model(arch, seed);
        let inputs = random_inputs(9, seed + 1);
        let targets = random_targets(9, seed + 2);
        let init = toy_init(seed + 3);
        let colloc = random_inputs(11, seed + 4);
        let batch = ObjectiveBatch {
            data_inputs: &inputs,
            data_targets: &targets,
            init: &init,
            collocation: &colloc,
        };
        let plan = DropoutPlan {
            seed: 77,
            data: dropout,
            physics: dropout,
        };
        for (name, w) in weight_sets() {
            let worst = check(&model, &batch, &w, plan);
            assert!(worst < REL, "network {i}, term {name}");
        }
    }
}

#[test]
fn gradient_of_total_is_weighted_sum_of_term_gradients() {
    let model = toy_model(toy_architectures().remove(1), 9);
    let inputs = random_inputs(6, 1);
    let targets = random_targets(6, 2);
    let init = toy_init(3);
    let colloc = random_inputs(8, 4);
    let batch = ObjectiveBatch {
        data_inputs: &inputs,
        data_targets: &targets,
        init: &init,
        collocation: &colloc,
    };
    let g = GravityPlanar::level();
    let grad = |w: LossWeights| {
        model
            .objective(&batch, &w, &g, DropoutPlan::OFF, true)
            .unwrap()
            .1
            .unwrap()
    };
    let w = LossWeights::new(0.7, 1.3, 0.25).unwrap();
    let total = grad(w);
    let mut sum = grad(LossWeights::new(1.0, 0.0, 0.0).unwrap());
    sum.iter_mut().for_each(|v| *v *= 0.7);
    sum.axpy(1.3, &grad(LossWeights::new(0.0, 1.0, 0.0).unwrap()));
    sum.axpy(0.25, &grad(LossWeights::new(0.0, 0.0, 1.0).unwrap()));
    for (a, b) in total.iter().zip(sum.iter()) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn objective_without_gradient_reports_same_breakdown() {
    let model = toy_model(toy_architectures().remove(0), 5);
    let inputs = random_inputs(4, 1);
    let targets = random_targets(4, 2);
    let init = toy_init(3);
    let colloc = random_inputs(5, 4);
    let batch = ObjectiveBatch {
        data_inputs: &inputs,
        data_targets: &targets,
        init: &init,
        collocation: &colloc,
    };
    let g = GravityPlanar::level();
    let w = LossWeights::default();
    let (a, _) = model.objective(&batch, &w, &g, DropoutPlan::OFF, false).unwrap();
    let (b, grads) = model.objective(&batch, &w, &g, DropoutPlan::OFF, true).unwrap();
    assert_eq!(a, b);
    assert_eq!(grads.unwrap().len(), model.network.arch.param_count());
    assert!((a.total - (a.data + a.init + 0.1 * a.phys)).abs() < 1e-15 * a.total.max(1.0));
}
