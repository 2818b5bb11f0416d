use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

use super::matrix::Matrix;

/// Shape of a fully connected network: `input → hidden… → output`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub output: usize,
    /// Layer normalization after every hidden affine map.
    pub layer_norm: bool,
    /// Dropout rate applied after every hidden activation while training.
    pub dropout: f64,
}

impl Architecture {
    /// `depth` hidden layers of `width` units each.
    pub fn mlp(input: usize, depth: usize, width: usize, output: usize) -> Self {
        Self {
            input,
            hidden: vec![width; depth],
            output,
            layer_norm: true,
            dropout: 0.0,
        }
    }

    pub fn with_dropout(mut self, rate: f64) -> Self {
        self.dropout = rate;
        self
    }

    pub fn with_layer_norm(mut self, on: bool) -> Self {
        self.layer_norm = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input == 0 || self.output == 0 || self.hidden.contains(&0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout rate {} outside [0, 1)", self.dropout)));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every affine layer, head last.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut widths = vec![self.input];
        widths.extend(&self.hidden);
        widths.push(self.output);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn num_layers(&self) -> usize {
        self.hidden.len() + 1
    }

    pub fn param_count(&self) -> usize {
        self.layer_dims()
            .iter()
            .enumerate()
            .map(|(l, &(i, o))| o * i + o + if self.has_norm(l) { 2 * o } else { 0 })
            .sum()
    }

    #[inline]
    pub(crate) fn has_norm(&self, layer: usize) -> bool {
        self.layer_norm && layer < self.hidden.len()
    }
}

/// Trainable parameters of one affine layer. `gain`/`offset` are empty when
/// the layer has no normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerParams<T> {
    /// `fan_out × fan_in`.
    pub weight: Matrix<T>,
    pub bias: Vec<T>,
    pub gain: Vec<T>,
    pub offset: Vec<T>,
}

impl<T: Scalar> LayerParams<T> {
    fn slices(&self) -> [&[T]; 4] {
        [self.weight.as_slice(), &self.bias, &self.gain, &self.offset]
    }

    fn slices_mut(&mut self) -> [&mut [T]; 4] {
        [
            self.weight.as_mut_slice(),
            &mut self.bias,
            &mut self.gain,
            &mut self.offset,
        ]
    }

    pub fn len(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.slices().into_iter().flatten()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.slices_mut().into_iter().flatten()
    }
}

/// All trainable parameters, one [`LayerParams`] per affine layer (head last).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params<T> {
    pub layers: Vec<LayerParams<T>>,
}

impl<T: Scalar> Params<T> {
    /// Glorot-uniform weights, zero biases, unit gains and zero offsets.
    pub fn init(arch: &Architecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = arch
            .layer_dims()
            .into_iter()
            .enumerate()
            .map(|(l, (fan_in, fan_out))| {
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let w = (0..fan_in * fan_out)
                    .map(|_| T::lit(rng.random_range(-bound..bound)))
                    .collect();
                let norm = if arch.has_norm(l) { fan_out } else { 0 };
                LayerParams {
                    weight: Matrix::from_vec(fan_out, fan_in, w),
                    bias: vec![T::zero(); fan_out],
                    gain: vec![T::one(); norm],
                    offset: vec![T::zero(); norm],
                }
            })
            .collect();
        Self { layers }
    }

    /// Same shapes, every entry zero.
    pub fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        out.iter_mut().for_each(|v| *v = T::zero());
        out
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(LayerParams::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.layers.iter().flat_map(LayerParams::iter)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers.iter_mut().flat_map(LayerParams::iter_mut)
    }

    /// Canonical order: per layer, weights (row-major), biases, gains, offsets.
    pub fn flatten(&self) -> Vec<T> {
        self.iter().copied().collect()
    }

    /// Inverse of [`Params::flatten`] for the given architecture.
    pub fn unflatten(arch: &Architecture, flat: &[T]) -> Result<Self> {
        if flat.len() != arch.param_count() {
            return Err(Error::Shape(format!(
                "{} parameters for an architecture with {}",
                flat.len(),
                arch.param_count()
            )));
        }
        let mut out = Self::init(arch, 0);
        for (dst, &src) in out.iter_mut().zip(flat) {
            *dst = src;
        }
        Ok(out)
    }

    /// Checks shapes against `arch` and that every entry is finite.
    pub fn validate(&self, arch: &Architecture) -> Result<()> {
        let dims = arch.layer_dims();
        if dims.len() != self.layers.len() {
            return Err(Error::Shape(format!(
                "{} layers, architecture has {}",
                self.layers.len(),
                dims.len()
            )));
        }
        for (l, (p, &(i, o))) in self.layers.iter().zip(&dims).enumerate() {
            let norm = if arch.has_norm(l) { o } else { 0 };
            if p.weight.shape() != (o, i) || p.bias.len() != o || p.gain.len() != norm || p.offset.len() != norm {
                return Err(Error::Shape(format!("layer {l} does not match {i}→{o}")));
            }
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite {
                    what: "parameters",
                    layer: Some(l),
                });
            }
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> Params<U> {
        Params {
            layers: self
                .layers
                .iter()
                .map(|p| {
                    let c = |v: &[T]| v.iter().map(|&x| cast(x)).collect::<Vec<U>>();
                    let (r, k) = p.weight.shape();
                    LayerParams {
                        weight: Matrix::from_vec(r, k, c(p.weight.as_slice())),
                        bias: c(&p.bias),
                        gain: c(&p.gain),
                        offset: c(&p.offset),
                    }
                })
                .collect(),
        }
    }

    /// `self += k·other`.
    pub fn axpy(&mut self, k: T, other: &Params<T>) {
        for (a, &b) in self.iter_mut().zip(other.iter()) {
            *a = *a + k * b;
        }
    }

    pub fn dot(&self, other: &Params<T>) -> T {
        self.iter().zip(other.iter()).map(|(&a, &b)| a * b).sum()
    }
}
