use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndiff::{Architecture, DualBatch, ForwardMode, Matrix, Network, Params};
use crate::normalize::AxisStats;
use crate::scalar::Scalar;
use crate::strapdown::GravityPlanar;

use super::data::{InitSet, SupervisedSet};
use super::loss::{
    data_loss_grad, init_loss, init_loss_grad, physics_loss, physics_residual_grad, total_loss, Input, LossBreakdown,
    LossWeights, PosVel, State, StateModel,
};

/// Normalized inputs beyond this many standard deviations count as extrapolation.
pub const EXTRAPOLATION_Z: f64 = 10.0;

/// Rows per forward pass when evaluating large sets.
const EVAL_CHUNK: usize = 4096;

/// A network plus the statistics that map physical inputs and outputs to and
/// from its normalized space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinnModel<T = f64> {
    pub network: Network<T>,
    pub input_stats: [AxisStats<T>; 4],
    pub output_stats: [AxisStats<T>; 5],
    /// Samples per window the model was trained on.
    pub window_len: usize,
    /// IMU sample interval, s.
    pub sample_interval: T,
}

/// Which forward passes of a training step run with dropout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DropoutPlan {
    pub seed: u64,
    pub data: bool,
    pub physics: bool,
}

impl DropoutPlan {
    pub const OFF: Self = Self {
        seed: 0,
        data: false,
        physics: false,
    };
}

/// Everything one evaluation of the weighted objective consumes.
#[derive(Clone, Copy, Debug)]
pub struct ObjectiveBatch<'a, T> {
    pub data_inputs: &'a [Input<T>],
    /// Only the position and velocity components enter the loss.
    pub data_targets: &'a [State<T>],
    pub init: &'a InitSet<T>,
    pub collocation: &'a [Input<T>],
}

fn stats_of<T: Scalar, const N: usize>(rows: &[[T; N]]) -> Result<[AxisStats<T>; N]> {
    let mut out = [AxisStats::identity(); N];
    for (j, o) in out.iter_mut().enumerate() {
        let col: Vec<T> = rows.iter().map(|r| r[j]).collect();
        *o = AxisStats::from_values(&col)?;
    }
    Ok(out)
}

fn pos_vel<T: Scalar>(s: &State<T>) -> PosVel<T> {
    [s[0], s[1], s[2], s[3]]
}

impl<T: Scalar> PinnModel<T> {
    /// Fresh network with statistics taken from the training set.
    pub fn for_training(arch: Architecture, seed: u64, train: &SupervisedSet<T>, sample_interval: T) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        Self::check_arch(&arch)?;
        Ok(Self {
            network: Network::new(arch, seed)?,
            input_stats: stats_of(&train.inputs)?,
            output_stats: stats_of(&train.targets)?,
            window_len: train.window_len,
            sample_interval,
        })
    }

    /// Identity statistics; mostly useful for tests.
    pub fn with_identity_stats(network: Network<T>, window_len: usize, sample_interval: T) -> Result<Self> {
        Self::check_arch(&network.arch)?;
        Ok(Self {
            network,
            input_stats: [AxisStats::identity(); 4],
            output_stats: [AxisStats::identity(); 5],
            window_len,
            sample_interval,
        })
    }

    fn check_arch(arch: &Architecture) -> Result<()> {
        if arch.input != 4 || arch.output != 5 {
            return Err(Error::Shape(format!(
                "navigation network must map 4 inputs to 5 outputs, got {} → {}",
                arch.input, arch.output
            )));
        }
        arch.validate()
    }

    pub fn validate(&self) -> Result<()> {
        Self::check_arch(&self.network.arch)?;
        self.network.params.validate(&self.network.arch)?;
        if self.window_len < 2 {
            return Err(Error::Shape(format!("window length {} below 2", self.window_len)));
        }
        if !(self.sample_interval > T::zero()) {
            return Err(Error::invalid("sample interval must be positive"));
        }
        let ok = |s: &AxisStats<T>| s.mean.is_finite() && s.std.is_finite() && s.std > T::zero();
        if !self.input_stats.iter().chain(&self.output_stats).all(ok) {
            return Err(Error::NonFinite {
                what: "normalization statistics",
                layer: None,
            });
        }
        Ok(())
    }

    /// Normalized input matrix and the largest absolute normalized value.
    pub fn normalize_inputs(&self, inputs: &[Input<T>]) -> (Matrix<T>, T) {
        let mut m = Matrix::zeros(inputs.len(), 4);
        let mut max_z = T::zero();
        for (i, u) in inputs.iter().enumerate() {
            for (j, (&v, s)) in u.iter().zip(&self.input_stats).enumerate() {
                let z = s.normalize(v);
                max_z = max_z.max(z.abs());
                m.set(i, j, z);
            }
        }
        (m, max_z)
    }

    fn denormalize_row(&self, out: &Matrix<T>, i: usize) -> State<T> {
        std::array::from_fn(|j| self.output_stats[j].denormalize(out.get(i, j)))
    }

    fn rate_row(&self, tangents: &Matrix<T>, i: usize) -> State<T> {
        std::array::from_fn(|j| self.output_stats[j].std * tangents.get(i, j))
    }

    /// Forward pass with the time tangent seeded so that the output tangents
    /// are `d(normalized output)/d(physical t)`.
    fn time_batch(&self, inputs: &[Input<T>]) -> DualBatch<T> {
        let (values, _) = self.normalize_inputs(inputs);
        DualBatch::time_seeded(values, 0, self.input_stats[0].std.recip())
    }

    /// Weighted objective and, when `want_grad`, its parameter gradient.
    pub fn objective(
        &self,
        batch: &ObjectiveBatch<'_, T>,
        weights: &LossWeights,
        gravity: &GravityPlanar<T>,
        dropout: DropoutPlan,
        want_grad: bool,
    ) -> Result<(LossBreakdown<T>, Option<Params<T>>)> {
        let n_d = batch.data_inputs.len();
        if n_d != batch.data_targets.len() {
            return Err(Error::Shape(format!(
                "{n_d} data inputs for {} targets",
                batch.data_targets.len()
            )));
        }
        let net = &self.network;
        let lam = |l: f64| T::lit(l);

        // data and initial-condition rows share one value-only pass
        let rows: Vec<Input<T>> = batch.data_inputs.iter().chain(&batch.init.points).copied().collect();
        let (x, _) = self.normalize_inputs(&rows);
        let mode = ForwardMode {
            training: dropout.data,
            dropout_seed: dropout.seed,
            record: want_grad,
        };
        let (out, trace) = net.forward(&DualBatch::values(x), mode)?;
        let phys: Vec<State<T>> = (0..rows.len()).map(|i| self.denormalize_row(&out.values, i)).collect();
        let pred: Vec<PosVel<T>> = phys[..n_d].iter().map(pos_vel).collect();
        let truth: Vec<PosVel<T>> = batch.data_targets.iter().map(pos_vel).collect();
        let (l_data, g_data) = data_loss_grad(&pred, &truth)?;
        let init_pos: Vec<[T; 2]> = phys[n_d..].iter().map(|s| [s[0], s[1]]).collect();
        let (l_init, g_init) = init_loss_grad(&init_pos, batch.init.target)?;

        let tb = self.time_batch(batch.collocation);
        let mode_p = ForwardMode {
            training: dropout.physics,
            dropout_seed: dropout.seed ^ 0x5EED_F00D_u64,
            record: want_grad,
        };
        let (out_p, trace_p) = net.forward(&tb, mode_p)?;
        let tang = out_p.tangents.as_ref().ok_or(Error::NoTangent)?;
        let n_p = batch.collocation.len();
        let states: Vec<State<T>> = (0..n_p).map(|i| self.denormalize_row(&out_p.values, i)).collect();
        let rates: Vec<State<T>> = (0..n_p).map(|i| self.rate_row(tang, i)).collect();
        let (l_phys, g_states, g_rates) = physics_residual_grad(batch.collocation, &states, &rates, gravity)?;

        let parts = total_loss(l_data, l_init, l_phys, weights);
        if !want_grad {
            return Ok((parts, None));
        }

        let sd: [T; 5] = std::array::from_fn(|j| self.output_stats[j].std);
        let mut adj = Matrix::zeros(rows.len(), 5);
        for (i, g) in g_data.iter().enumerate() {
            for j in 0..4 {
                adj.set(i, j, lam(weights.lambda_data) * g[j] * sd[j]);
            }
        }
        for (i, g) in g_init.iter().enumerate() {
            for j in 0..2 {
                adj.set(n_d + i, j, lam(weights.lambda_init) * g[j] * sd[j]);
            }
        }
        let mut grads = net.backward(&trace, &DualBatch::values(adj))?;

        let lp = lam(weights.lambda_phys);
        let mut adj_v = Matrix::zeros(n_p, 5);
        let mut adj_t = Matrix::zeros(n_p, 5);
        for i in 0..n_p {
            for j in 0..5 {
                adj_v.set(i, j, lp * g_states[i][j] * sd[j]);
                adj_t.set(i, j, lp * g_rates[i][j] * sd[j]);
            }
        }
        let gp = net.backward(&trace_p, &DualBatch::with_tangents(adj_v, adj_t)?)?;
        grads.axpy(T::one(), &gp);
        Ok((parts, Some(grads)))
    }

    /// Data loss over a whole supervised set with dropout off.
    pub fn data_loss_on(&self, set: &SupervisedSet<T>) -> Result<T> {
        if set.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let mut sum = T::zero();
        for (inp, tgt) in set.inputs.chunks(EVAL_CHUNK).zip(set.targets.chunks(EVAL_CHUNK)) {
            let pred: Vec<PosVel<T>> = self.states(inp)?.iter().map(pos_vel).collect();
            let truth: Vec<PosVel<T>> = tgt.iter().map(pos_vel).collect();
            let (l, _) = data_loss_grad(&pred, &truth)?;
            sum = sum + l * T::from_usize(inp.len()).unwrap();
        }
        Ok(sum / T::from_usize(set.inputs.len()).unwrap())
    }

    /// Initial-condition and physics losses with dropout off.
    pub fn init_and_physics_loss(
        &self,
        init: &InitSet<T>,
        collocation: &[Input<T>],
        gravity: &GravityPlanar<T>,
    ) -> Result<(T, T)> {
        let pos: Vec<[T; 2]> = self.states(&init.points)?.iter().map(|s| [s[0], s[1]]).collect();
        let l_init = init_loss(&pos, init.target)?;
        Ok((l_init, physics_loss(self, collocation, gravity)?))
    }

    pub fn cast<U: Scalar>(&self) -> PinnModel<U> {
        let c = |s: &AxisStats<T>| AxisStats {
            mean: crate::scalar::cast(s.mean),
            std: crate::scalar::cast(s.std),
        };
        PinnModel {
            network: self.network.cast(),
            input_stats: self.input_stats.each_ref().map(c),
            output_stats: self.output_stats.each_ref().map(c),
            window_len: self.window_len,
            sample_interval: crate::scalar::cast(self.sample_interval),
        }
    }
}

impl<T: Scalar> StateModel<T> for PinnModel<T> {
    fn states(&self, inputs: &[Input<T>]) -> Result<Vec<State<T>>> {
        let (x, _) = self.normalize_inputs(inputs);
        let out = self.network.predict(&x)?;
        Ok((0..inputs.len()).map(|i| self.denormalize_row(&out, i)).collect())
    }

    fn states_and_rates(&self, inputs: &[Input<T>]) -> Result<(Vec<State<T>>, Vec<State<T>>)> {
        let (out, _) = self.network.forward(&self.time_batch(inputs), ForwardMode::INFERENCE)?;
        let tang = out.tangents.as_ref().ok_or(Error::NoTangent)?;
        Ok((
            (0..inputs.len())
                .map(|i| self.denormalize_row(&out.values, i))
                .collect(),
            (0..inputs.len()).map(|i| self.rate_row(tang, i)).collect(),
        ))
    }
}
