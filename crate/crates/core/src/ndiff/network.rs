use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::activation::sintanh_jet;
use super::matrix::Matrix;
use super::params::{Architecture, LayerParams, Params};

/// Layer-normalization variance floor.
pub const LAYER_NORM_EPS: f64 = 1e-5;

/// A batch of activations with an optional tangent channel `d(activation)/dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualBatch<T> {
    pub values: Matrix<T>,
    pub tangents: Option<Matrix<T>>,
}

impl<T: Scalar> DualBatch<T> {
    pub fn values(values: Matrix<T>) -> Self {
        Self { values, tangents: None }
    }

    pub fn with_tangents(values: Matrix<T>, tangents: Matrix<T>) -> Result<Self> {
        if values.shape() != tangents.shape() {
            return Err(Error::Shape(format!(
                "values {:?} vs tangents {:?}",
                values.shape(),
                tangents.shape()
            )));
        }
        Ok(Self {
            values,
            tangents: Some(tangents),
        })
    }

    /// Tangent `seed` on column `time_col`, zero on every other column.
    pub fn time_seeded(values: Matrix<T>, time_col: usize, seed: T) -> Self {
        let mut tangents = Matrix::zeros(values.rows(), values.cols());
        for i in 0..values.rows() {
            tangents.set(i, time_col, seed);
        }
        Self {
            values,
            tangents: Some(tangents),
        }
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }
}

/// How a forward pass runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ForwardMode {
    /// Dropout active.
    pub training: bool,
    /// Seed for the dropout masks.
    pub dropout_seed: u64,
    /// Keep intermediates for [`Network::backward`].
    pub record: bool,
}

impl ForwardMode {
    /// Dropout off, nothing recorded.
    pub const INFERENCE: Self = Self {
        training: false,
        dropout_seed: 0,
        record: false,
    };

    /// Dropout off, graph recorded.
    pub const EVAL_RECORDED: Self = Self {
        training: false,
        dropout_seed: 0,
        record: true,
    };

    pub fn training(dropout_seed: u64) -> Self {
        Self {
            training: true,
            dropout_seed,
            record: true,
        }
    }
}

#[derive(Clone, Debug)]
struct NormTrace<T> {
    x: Matrix<T>,
    inv_std: Vec<T>,
    /// Row-centred input tangent and `mean(x·centred tangent)` per row.
    centred_t: Option<(Matrix<T>, Vec<T>)>,
    x_t: Option<Matrix<T>>,
}

#[derive(Clone, Debug)]
struct LayerTrace<T> {
    input: Matrix<T>,
    input_t: Option<Matrix<T>>,
    norm: Option<NormTrace<T>>,
    /// Activation input tangent with `φ'` and `φ''` at the activation input.
    pre_t: Option<Matrix<T>>,
    d1: Matrix<T>,
    d2: Option<Matrix<T>>,
    mask: Option<Vec<T>>,
}

/// Intermediates of a recorded forward pass.
#[derive(Clone, Debug, Default)]
pub struct Trace<T> {
    hidden: Vec<LayerTrace<T>>,
    head: Option<(Matrix<T>, Option<Matrix<T>>)>,
}

impl<T> Trace<T> {
    pub fn is_recorded(&self) -> bool {
        self.head.is_some()
    }
}

/// A dense SinTanh network with optional layer normalization and dropout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network<T> {
    pub arch: Architecture,
    pub params: Params<T>,
}

fn row_mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::from_usize(v.len()).unwrap()
}

/// `J·v = s(v − mean(v) − x·mean(x·v))`, the layer-norm Jacobian (symmetric).
fn norm_jacobian_apply<T: Scalar>(s: T, x: &[T], v: &[T], out: &mut [T]) {
    let mv = row_mean(v);
    let mxv = x.iter().zip(v).map(|(&a, &b)| a * b).sum::<T>() / T::from_usize(v.len()).unwrap();
    for ((o, &vi), &xi) in out.iter_mut().zip(v).zip(x) {
        *o = *o + s * (vi - mv - xi * mxv);
    }
}

impl<T: Scalar> Network<T> {
    pub fn new(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let params = Params::init(&arch, seed);
        Ok(Self { arch, params })
    }

    pub fn from_params(arch: Architecture, params: Params<T>) -> Result<Self> {
        arch.validate()?;
        params.validate(&arch)?;
        Ok(Self { arch, params })
    }

    /// Propagates values and tangents jointly through every layer.
    pub fn forward(&self, batch: &DualBatch<T>, mode: ForwardMode) -> Result<(DualBatch<T>, Trace<T>)> {
        if batch.values.cols() != self.arch.input {
            return Err(Error::Shape(format!(
                "input width {} for a network expecting {}",
                batch.values.cols(),
                self.arch.input
            )));
        }
        if let Some(t) = &batch.tangents {
            if t.shape() != batch.values.shape() {
                return Err(Error::Shape("tangent shape differs from values".into()));
            }
        }
        let p_drop = if mode.training { self.arch.dropout } else { 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(mode.dropout_seed);
        let mut trace = Trace {
            hidden: Vec::new(),
            head: None,
        };
        let mut a = batch.values.clone();
        let mut a_t = batch.tangents.clone();
        let n_hidden = self.arch.hidden.len();

        for (l, p) in self.params.layers.iter().enumerate().take(n_hidden) {
            let z = a.affine(&p.weight, Some(&p.bias));
            let z_t = a_t.as_ref().map(|t| t.affine(&p.weight, None));
            let (u, u_t, norm) = if self.arch.has_norm(l) {
                let (u, u_t, nt) = layer_norm_forward(p, z, z_t);
                (u, u_t, Some(nt))
            } else {
                (z, z_t, None)
            };

            let (rows, cols) = u.shape();
            let mut h = Matrix::zeros(rows, cols);
            let mut d1 = Matrix::zeros(rows, cols);
            let mut d2 = u_t.as_ref().map(|_| Matrix::zeros(rows, cols));
            for k in 0..rows * cols {
                let (v, g1, g2) = sintanh_jet(u.as_slice()[k]);
                h.as_mut_slice()[k] = v;
                d1.as_mut_slice()[k] = g1;
                if let Some(d2) = d2.as_mut() {
                    d2.as_mut_slice()[k] = g2;
                }
            }
            let mut h_t = u_t.as_ref().map(|ut| {
                let mut ht = ut.clone();
                for (o, &g) in ht.as_mut_slice().iter_mut().zip(d1.as_slice()) {
                    *o = *o * g;
                }
                ht
            });

            let mask = (p_drop > 0.0).then(|| {
                let keep = T::lit(1.0 / (1.0 - p_drop));
                (0..rows * cols)
                    .map(|_| if rng.random::<f64>() < p_drop { T::zero() } else { keep })
                    .collect::<Vec<T>>()
            });
            if let Some(m) = &mask {
                for (v, &k) in h.as_mut_slice().iter_mut().zip(m) {
                    *v = *v * k;
                }
                if let Some(ht) = h_t.as_mut() {
                    for (v, &k) in ht.as_mut_slice().iter_mut().zip(m) {
                        *v = *v * k;
                    }
                }
            }

            if mode.record {
                trace.hidden.push(LayerTrace {
                    input: a,
                    input_t: a_t,
                    norm,
                    pre_t: u_t,
                    d1,
                    d2,
                    mask,
                });
            }
            a = h;
            a_t = h_t;
        }

        let head = &self.params.layers[n_hidden];
        let out = a.affine(&head.weight, Some(&head.bias));
        let out_t = a_t.as_ref().map(|t| t.affine(&head.weight, None));
        if mode.record {
            trace.head = Some((a, a_t));
        }
        Ok((
            DualBatch {
                values: out,
                tangents: out_t,
            },
            trace,
        ))
    }

    /// Gradient of a scalar loss with respect to every parameter, given the
    /// loss adjoints of the outputs (`values`) and of their tangents.
    pub fn backward(&self, trace: &Trace<T>, adjoint: &DualBatch<T>) -> Result<Params<T>> {
        let (head_in, head_in_t) = trace.head.as_ref().ok_or(Error::NoGraph)?;
        if adjoint.values.shape() != (head_in.rows(), self.arch.output) {
            return Err(Error::Shape(format!(
                "output adjoint {:?} for outputs {:?}",
                adjoint.values.shape(),
                (head_in.rows(), self.arch.output)
            )));
        }
        if adjoint.tangents.is_some() && head_in_t.is_none() {
            return Err(Error::NoTangent);
        }
        let mut grads = self.params.zeros_like();
        let n_hidden = self.arch.hidden.len();

        let head = &self.params.layers[n_hidden];
        let gl = &mut grads.layers[n_hidden];
        let (mut ga, mut ga_t) = affine_backward(
            head,
            gl,
            head_in,
            head_in_t.as_ref(),
            &adjoint.values,
            adjoint.tangents.as_ref(),
            true,
        );

        for l in (0..n_hidden).rev() {
            let tr = &trace.hidden[l];
            let p = &self.params.layers[l];
            let mut gh = ga.take().expect("hidden adjoint");
            let mut gh_t = ga_t.take();
            if let Some(m) = &tr.mask {
                for (v, &k) in gh.as_mut_slice().iter_mut().zip(m) {
                    *v = *v * k;
                }
                if let Some(g) = gh_t.as_mut() {
                    for (v, &k) in g.as_mut_slice().iter_mut().zip(m) {
                        *v = *v * k;
                    }
                }
            }

            // activation: gu = gh·φ' + gḣ·φ''·u̇, gu̇ = gḣ·φ'
            let mut gu = gh;
            for (v, &g1) in gu.as_mut_slice().iter_mut().zip(tr.d1.as_slice()) {
                *v = *v * g1;
            }
            let gu_t = match (gh_t, &tr.pre_t, &tr.d2) {
                (Some(mut ght), Some(ut), Some(d2)) => {
                    for k in 0..ght.as_slice().len() {
                        let g = ght.as_slice()[k];
                        gu.as_mut_slice()[k] = gu.as_slice()[k] + g * d2.as_slice()[k] * ut.as_slice()[k];
                        ght.as_mut_slice()[k] = g * tr.d1.as_slice()[k];
                    }
                    Some(ght)
                }
                _ => None,
            };

            let gl = &mut grads.layers[l];
            let (gz, gz_t) = match &tr.norm {
                Some(nt) => layer_norm_backward(p, gl, nt, gu, gu_t),
                None => (gu, gu_t),
            };
            let (a, a_t) = affine_backward(p, gl, &tr.input, tr.input_t.as_ref(), &gz, gz_t.as_ref(), l > 0);
            ga = a;
            ga_t = a_t;
        }
        Ok(grads)
    }

    /// Forward pass on plain values with dropout off.
    pub fn predict(&self, inputs: &Matrix<T>) -> Result<Matrix<T>> {
        Ok(self
            .forward(&DualBatch::values(inputs.clone()), ForwardMode::INFERENCE)?
            .0
            .values)
    }

    pub fn cast<U: Scalar>(&self) -> Network<U> {
        Network {
            arch: self.arch.clone(),
            params: self.params.cast(),
        }
    }
}

fn layer_norm_forward<T: Scalar>(
    p: &LayerParams<T>,
    z: Matrix<T>,
    z_t: Option<Matrix<T>>,
) -> (Matrix<T>, Option<Matrix<T>>, NormTrace<T>) {
    let (rows, cols) = z.shape();
    let n = T::from_usize(cols).unwrap();
    let eps = T::lit(LAYER_NORM_EPS);
    let mut x = z;
    let mut inv_std = Vec::with_capacity(rows);
    for i in 0..rows {
        let r = x.row_mut(i);
        let mean = row_mean(r);
        r.iter_mut().for_each(|v| *v = *v - mean);
        let var = r.iter().map(|&d| d * d).sum::<T>() / n;
        let s = (var + eps).sqrt().recip();
        r.iter_mut().for_each(|v| *v = *v * s);
        inv_std.push(s);
    }

    let (centred_t, x_t) = match z_t {
        Some(mut dc) => {
            let mut xt = Matrix::zeros(rows, cols);
            let mut ms = Vec::with_capacity(rows);
            for i in 0..rows {
                let r = dc.row_mut(i);
                let mean = row_mean(r);
                r.iter_mut().for_each(|v| *v = *v - mean);
                let xr = x.row(i);
                let m = xr.iter().zip(r.iter()).map(|(&a, &b)| a * b).sum::<T>() / n;
                let s = inv_std[i];
                for ((o, &d), &xv) in xt.row_mut(i).iter_mut().zip(r.iter()).zip(xr) {
                    *o = s * (d - xv * m);
                }
                ms.push(m);
            }
            (Some((dc, ms)), Some(xt))
        }
        None => (None, None),
    };

    let mut u = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for (j, (o, &xv)) in u.row_mut(i).iter_mut().zip(x.row(i)).enumerate() {
            *o = p.gain[j] * xv + p.offset[j];
        }
    }
    let u_t = x_t.as_ref().map(|xt| {
        let mut ut = xt.clone();
        for i in 0..rows {
            for (o, &g) in ut.row_mut(i).iter_mut().zip(&p.gain) {
                *o = *o * g;
            }
        }
        ut
    });
    (
        u,
        u_t,
        NormTrace {
            x,
            inv_std,
            centred_t,
            x_t,
        },
    )
}

fn layer_norm_backward<T: Scalar>(
    p: &LayerParams<T>,
    g: &mut LayerParams<T>,
    nt: &NormTrace<T>,
    gu: Matrix<T>,
    gu_t: Option<Matrix<T>>,
) -> (Matrix<T>, Option<Matrix<T>>) {
    let (rows, cols) = gu.shape();
    let n = T::from_usize(cols).unwrap();
    let mut gz = Matrix::zeros(rows, cols);
    let mut gz_t = gu_t.as_ref().map(|_| Matrix::zeros(rows, cols));
    let mut gx = vec![T::zero(); cols];
    let mut gxt = vec![T::zero(); cols];
    let mut c = vec![T::zero(); cols];

    for i in 0..rows {
        let x = nt.x.row(i);
        let s = nt.inv_std[i];
        for j in 0..cols {
            let gv = gu.get(i, j);
            g.offset[j] = g.offset[j] + gv;
            g.gain[j] = g.gain[j] + gv * x[j];
            gx[j] = p.gain[j] * gv;
        }
        norm_jacobian_apply(s, x, &gx, gz.row_mut(i));

        if let (Some(gut), Some(xt), Some((dc, ms)), Some(gzt)) =
            (gu_t.as_ref(), nt.x_t.as_ref(), nt.centred_t.as_ref(), gz_t.as_mut())
        {
            let xt = xt.row(i);
            let dc = dc.row(i);
            let m = ms[i];
            for j in 0..cols {
                let gv = gut.get(i, j);
                g.gain[j] = g.gain[j] + gv * xt[j];
                gxt[j] = p.gain[j] * gv;
            }
            norm_jacobian_apply(s, x, &gxt, gzt.row_mut(i));

            // second-order path: ẋ depends on z through s and x
            let a: T = gxt.iter().zip(dc).map(|(&u, &v)| u * v).sum();
            let b: T = gxt.iter().zip(x).map(|(&u, &v)| u * v).sum();
            let ks = -(a - m * b) * s * s / n;
            for j in 0..cols {
                c[j] = -s * (b * dc[j] / n + m * gxt[j]);
            }
            let row = gz.row_mut(i);
            for (o, &xv) in row.iter_mut().zip(x) {
                *o = *o + ks * xv;
            }
            norm_jacobian_apply(s, x, &c, row);
        }
    }
    (gz, gz_t)
}

/// Accumulates weight/bias adjoints and returns input adjoints when
/// `want_input` is set.
fn affine_backward<T: Scalar>(
    p: &LayerParams<T>,
    g: &mut LayerParams<T>,
    a: &Matrix<T>,
    a_t: Option<&Matrix<T>>,
    gz: &Matrix<T>,
    gz_t: Option<&Matrix<T>>,
    want_input: bool,
) -> (Option<Matrix<T>>, Option<Matrix<T>>) {
    Matrix::accumulate_outer(&mut g.weight, gz, a);
    if let (Some(gzt), Some(at)) = (gz_t, a_t) {
        Matrix::accumulate_outer(&mut g.weight, gzt, at);
    }
    for (b, s) in g.bias.iter_mut().zip(gz.column_sums()) {
        *b = *b + s;
    }
    if !want_input {
        return (None, None);
    }
    let ga = gz.back_affine(&p.weight);
    let ga_t = match (gz_t, a_t) {
        (Some(gzt), Some(_)) => Some(gzt.back_affine(&p.weight)),
        _ => None,
    };
    (Some(ga), ga_t)
}
