use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::strapdown::GravityPlanar;

/// Network input record `(t, fx, fy, ωz)` in physical units.
pub type Input<T> = [T; 4];
/// Network output record `(x, y, vx, vy, ψ)` in physical units.
pub type State<T> = [T; 5];
/// Position and velocity `(x, y, vx, vy)`.
pub type PosVel<T> = [T; 4];

/// Weights of the data, initial-condition and physics terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub lambda_data: f64,
    pub lambda_init: f64,
    pub lambda_phys: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_data: 1.0,
            lambda_init: 1.0,
            lambda_phys: 0.1,
        }
    }
}

impl LossWeights {
    pub fn new(lambda_data: f64, lambda_init: f64, lambda_phys: f64) -> Result<Self> {
        let w = Self {
            lambda_data,
            lambda_init,
            lambda_phys,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda_data, self.lambda_init, self.lambda_phys];
        if all.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::Config(format!(
                "loss weights must be finite and non-negative, got {all:?}"
            )));
        }
        if all.iter().all(|&l| l == 0.0) {
            return Err(Error::Config("at least one loss weight must be positive".into()));
        }
        Ok(())
    }
}

/// Unweighted loss components and their weighted sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown<T = f64> {
    pub data: T,
    pub init: T,
    pub phys: T,
    pub total: T,
}

/// Populates the weighted sum.
pub fn total_loss<T: Scalar>(data: T, init: T, phys: T, weights: &LossWeights) -> LossBreakdown<T> {
    LossBreakdown {
        data,
        init,
        phys,
        total: T::lit(weights.lambda_data) * data
            + T::lit(weights.lambda_init) * init
            + T::lit(weights.lambda_phys) * phys,
    }
}

impl<T: Scalar> LossBreakdown<T> {
    pub fn is_finite(&self) -> bool {
        self.data.is_finite() && self.init.is_finite() && self.phys.is_finite() && self.total.is_finite()
    }

    pub fn to_f64(&self) -> LossBreakdown<f64> {
        LossBreakdown {
            data: self.data.to_f64_lossy(),
            init: self.init.to_f64_lossy(),
            phys: self.phys.to_f64_lossy(),
            total: self.total.to_f64_lossy(),
        }
    }
}

fn mean_of<T: Scalar>(sum: T, n: usize) -> T {
    sum / T::from_usize(n).unwrap()
}

/// Mean over samples of `‖p − p̂‖² + ‖v − v̂‖²`.
pub fn data_loss<T: Scalar>(pred: &[PosVel<T>], truth: &[PosVel<T>]) -> Result<T> {
    Ok(data_loss_grad(pred, truth)?.0)
}

/// [`data_loss`] and its gradient with respect to `pred`.
pub fn data_loss_grad<T: Scalar>(pred: &[PosVel<T>], truth: &[PosVel<T>]) -> Result<(T, Vec<PosVel<T>>)> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} targets",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let k = T::lit(2.0) / T::from_usize(pred.len()).unwrap();
    let mut sum = T::zero();
    let grads = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| {
            let mut g = [T::zero(); 4];
            for j in 0..4 {
                let e = p[j] - t[j];
                sum = sum + e * e;
                g[j] = k * e;
            }
            g
        })
        .collect();
    Ok((mean_of(sum, pred.len()), grads))
}

/// Mean of `‖p̂_i − p₀‖²`.
pub fn init_loss<T: Scalar>(pred_init_positions: &[[T; 2]], p0: [T; 2]) -> Result<T> {
    Ok(init_loss_grad(pred_init_positions, p0)?.0)
}

pub fn init_loss_grad<T: Scalar>(pred: &[[T; 2]], p0: [T; 2]) -> Result<(T, Vec<[T; 2]>)> {
    if pred.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let k = T::lit(2.0) / T::from_usize(pred.len()).unwrap();
    let mut sum = T::zero();
    let grads = pred
        .iter()
        .map(|p| {
            let (ex, ey) = (p[0] - p0[0], p[1] - p0[1]);
            sum = sum + ex * ex + ey * ey;
            [k * ex, k * ey]
        })
        .collect();
    Ok((mean_of(sum, pred.len()), grads))
}

/// Mean squared residual of the planar navigation equations at each point,
/// with its gradient with respect to the states and to their time rates.
///
/// Residuals: `ṗ − v`, `v̇ − (C(ψ)·f + g)`, `ψ̇ − ωz`.
pub fn physics_residual_grad<T: Scalar>(
    inputs: &[Input<T>],
    states: &[State<T>],
    rates: &[State<T>],
    gravity: &GravityPlanar<T>,
) -> Result<(T, Vec<State<T>>, Vec<State<T>>)> {
    if inputs.len() != states.len() || inputs.len() != rates.len() {
        return Err(Error::Shape(format!(
            "{} inputs, {} states, {} rates",
            inputs.len(),
            states.len(),
            rates.len()
        )));
    }
    if inputs.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let k = T::lit(2.0) / T::from_usize(inputs.len()).unwrap();
    let mut sum = T::zero();
    let mut g_states = Vec::with_capacity(inputs.len());
    let mut g_rates = Vec::with_capacity(inputs.len());
    for ((u, s), d) in inputs.iter().zip(states).zip(rates) {
        let (fx, fy, wz) = (u[1], u[2], u[3]);
        let (sn, cs) = s[4].sin_cos();
        let ax = cs * fx - sn * fy + gravity.gx;
        let ay = sn * fx + cs * fy + gravity.gy;
        let r = [d[0] - s[2], d[1] - s[3], d[2] - ax, d[3] - ay, d[4] - wz];
        sum = sum + r.iter().map(|&v| v * v).sum::<T>();
        let dpsi = r[2] * (sn * fx + cs * fy) - r[3] * (cs * fx - sn * fy);
        g_states.push([T::zero(), T::zero(), -k * r[0], -k * r[1], k * dpsi]);
        g_rates.push(r.map(|v| k * v));
    }
    Ok((mean_of(sum, inputs.len()), g_states, g_rates))
}

pub fn physics_residual<T: Scalar>(
    inputs: &[Input<T>],
    states: &[State<T>],
    rates: &[State<T>],
    gravity: &GravityPlanar<T>,
) -> Result<T> {
    Ok(physics_residual_grad(inputs, states, rates, gravity)?.0)
}

/// Something that maps inputs to states, optionally with time derivatives.
pub trait StateModel<T: Scalar> {
    fn states(&self, inputs: &[Input<T>]) -> Result<Vec<State<T>>>;

    /// States and their derivatives with respect to the time input.
    fn states_and_rates(&self, _inputs: &[Input<T>]) -> Result<(Vec<State<T>>, Vec<State<T>>)> {
        Err(Error::NoTangent)
    }
}

/// Physics residual of `model` over the collocation points.
pub fn physics_loss<T: Scalar, M: StateModel<T> + ?Sized>(
    model: &M,
    collocation: &[Input<T>],
    gravity: &GravityPlanar<T>,
) -> Result<T> {
    let (states, rates) = model.states_and_rates(collocation)?;
    physics_residual(collocation, &states, &rates, gravity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn data_loss_examples() {
        let a = [[1.0, 2.0, 3.0, 4.0]];
        assert_eq!(data_loss(&a, &a).unwrap(), 0.0);
        assert_eq!(data_loss(&[[1.0, 0.0, 0.0, 2.0]], &[[0.0; 4]]).unwrap(), 5.0);
        assert_eq!(data_loss(&[[2.0, 0.0, 0.0, 4.0]], &[[0.0; 4]]).unwrap(), 20.0);
        assert!(matches!(data_loss(&a, &[]), Err(Error::Shape(_))));
    }

    #[test]
    fn init_loss_examples() {
        assert_eq!(init_loss(&[[1.0, 2.0]; 3], [1.0, 2.0]).unwrap(), 0.0);
        let l: f64 = init_loss(&[[0.1, 0.0]; 200], [0.0, 0.0]).unwrap();
        assert!((l - 0.01).abs() < 1e-15);
        let mixed = [[0.3, 0.1], [0.0, -0.2], [1.0, 1.0]];
        let doubled: Vec<_> = mixed.iter().chain(&mixed).copied().collect();
        let (m, d): (f64, f64) = (
            init_loss(&mixed, [0.0, 0.0]).unwrap(),
            init_loss(&doubled, [0.0, 0.0]).unwrap(),
        );
        assert!((m - d).abs() < 1e-15);
    }

    #[test]
    fn total_loss_examples() {
        let ones = LossWeights::new(1.0, 1.0, 1.0).unwrap();
        assert!((total_loss(0.2f64, 0.3, 0.5, &ones).total - 1.0).abs() < 1e-15);
        let phys_only = LossWeights::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(total_loss(7.0, 3.0, 0.25, &phys_only).total, 0.25);
        assert!((total_loss(1.0f64, 1.0, 1.0, &LossWeights::default()).total - 2.1).abs() < 1e-15);
        assert!(LossWeights::new(0.0, 0.0, 0.0).is_err());
        assert!(LossWeights::new(-1.0, 0.0, 1.0).is_err());
    }

    /// `x = t²/2, vx = t, ψ = 0` under `fx = 1`, no gravity.
    struct Parabola;

    impl StateModel<f64> for Parabola {
        fn states(&self, inputs: &[Input<f64>]) -> Result<Vec<State<f64>>> {
            Ok(inputs
                .iter()
                .map(|u| [0.5 * u[0] * u[0], 0.0, u[0], 0.0, 0.0])
                .collect())
        }

        fn states_and_rates(&self, inputs: &[Input<f64>]) -> Result<(Vec<State<f64>>, Vec<State<f64>>)> {
            let rates = inputs.iter().map(|u| [u[0], 0.0, 1.0, 0.0, 0.0]).collect();
            Ok((self.states(inputs)?, rates))
        }
    }

    fn parabola_points(wz: f64) -> Vec<Input<f64>> {
        (0..50).map(|k| [k as f64 * 0.1, 1.0, 0.0, wz]).collect()
    }

    #[test]
    fn exact_solution_has_zero_residual() {
        let g = GravityPlanar::level();
        let l = physics_loss(&Parabola, &parabola_points(0.0), &g).unwrap();
        assert!(l < 1e-12);
    }

    #[test]
    fn yaw_rate_mismatch_fires_only_yaw_term() {
        let g = GravityPlanar::level();
        let l = physics_loss(&Parabola, &parabola_points(0.1), &g).unwrap();
        assert!((l - 0.01).abs() < 1e-15, "{l}");
    }

    struct ValuesOnly;

    impl StateModel<f64> for ValuesOnly {
        fn states(&self, inputs: &[Input<f64>]) -> Result<Vec<State<f64>>> {
            Ok(vec![[0.0; 5]; inputs.len()])
        }
    }

    #[test]
    fn model_without_tangents_is_rejected() {
        let r = physics_loss(&ValuesOnly, &parabola_points(0.0), &GravityPlanar::level());
        assert!(matches!(r, Err(Error::NoTangent)));
    }

    #[test]
    fn residual_gradient_matches_finite_differences() {
        let inputs = vec![[0.0, 0.3, -0.7, 0.2], [0.1, 1.1, 0.4, -0.5]];
        let states = vec![[0.1, 0.2, 0.9, -0.3, 0.4], [0.5, -0.1, 0.2, 0.8, -1.2]];
        let rates = vec![[1.0, -0.2, 0.3, 0.1, 0.05], [0.4, 0.9, -0.6, 0.2, 0.3]];
        let g = GravityPlanar { gx: 0.05, gy: -0.02 };
        let (_, gs, gr) = physics_residual_grad(&inputs, &states, &rates, &g).unwrap();
        let h = 1e-6;
        for i in 0..2 {
            for j in 0..5 {
                let f = |d: f64, which: usize| {
                    let (mut s, mut r) = (states.clone(), rates.clone());
                    if which == 0 {
                        s[i][j] += d;
                    } else {
                        r[i][j] += d;
                    }
                    physics_residual(&inputs, &s, &r, &g).unwrap()
                };
                let fd_s = (f(h, 0) - f(-h, 0)) / (2.0 * h);
                let fd_r = (f(h, 1) - f(-h, 1)) / (2.0 * h);
                assert!((fd_s - gs[i][j]).abs() < 1e-7, "state {i},{j}");
                assert!((fd_r - gr[i][j]).abs() < 1e-7, "rate {i},{j}");
            }
        }
    }

    proptest! {
        #[test]
        fn residual_ignores_point_order(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 17;
            let mut rows: Vec<(Input<f64>, State<f64>, State<f64>)> = (0..n)
                .map(|_| {
                    let mut r = || rng.random_range(-2.0..2.0);
                    ([r(), r(), r(), r()], [r(), r(), r(), r(), r()], [r(), r(), r(), r(), r()])
                })
                .collect();
            let g = GravityPlanar::level();
            let eval = |rows: &[(Input<f64>, State<f64>, State<f64>)]| {
                let i: Vec<_> = rows.iter().map(|r| r.0).collect();
                let s: Vec<_> = rows.iter().map(|r| r.1).collect();
                let d: Vec<_> = rows.iter().map(|r| r.2).collect();
                physics_residual(&i, &s, &d, &g).unwrap()
            };
            let a = eval(&rows);
            rows.reverse();
            rows.rotate_left(5);
            prop_assert!((a - eval(&rows)).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn total_is_weighted_sum(d in 0.0..10.0f64, i in 0.0..10.0f64, p in 0.0..10.0f64,
                                 ld in 0.0..5.0f64, li in 0.0..5.0f64, lp in 0.01..5.0f64) {
            let w = LossWeights::new(ld, li, lp).unwrap();
            let b = total_loss(d, i, p, &w);
            let want = ld * d + li * i + lp * p;
            prop_assert!((b.total - want).abs() <= 1e-12 * want.max(1e-300));
            prop_assert_eq!((b.data, b.init, b.phys), (d, i, p));
        }
    }
}
