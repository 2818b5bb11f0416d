//! Per-axis standardization with exact inverse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Mean and population standard deviation of one axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisStats<T = f64> {
    pub mean: T,
    pub std: T,
}

impl<T: Scalar> AxisStats<T> {
    pub fn identity() -> Self {
        Self {
            mean: T::zero(),
            std: T::one(),
        }
    }

    /// Statistics of `values`; a constant axis gets std 1.
    pub fn from_values(values: &[T]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("cannot normalize an empty axis"));
        }
        let n = T::from_usize(values.len()).unwrap();
        let mean = values.iter().copied().sum::<T>() / n;
        let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
        let std = var.sqrt();
        let std = if std > T::zero() && std.is_finite() {
            std
        } else {
            T::one()
        };
        Ok(Self { mean, std })
    }

    #[inline]
    pub fn normalize(&self, v: T) -> T {
        (v - self.mean) / self.std
    }

    #[inline]
    pub fn denormalize(&self, v: T) -> T {
        v * self.std + self.mean
    }
}

/// Normalizes each axis independently by its own mean and std.
pub fn normalize_axes<T: Scalar>(axes: &[Vec<T>]) -> Result<(Vec<Vec<T>>, Vec<AxisStats<T>>)> {
    let stats = axes
        .iter()
        .map(|a| AxisStats::from_values(a))
        .collect::<Result<Vec<_>>>()?;
    let normalized = axes
        .iter()
        .zip(&stats)
        .map(|(a, s)| a.iter().map(|&v| s.normalize(v)).collect())
        .collect();
    Ok((normalized, stats))
}

pub fn denormalize_axes<T: Scalar>(axes: &[Vec<T>], stats: &[AxisStats<T>]) -> Result<Vec<Vec<T>>> {
    if axes.len() != stats.len() {
        return Err(Error::Shape(format!(
            "{} axes but {} statistics",
            axes.len(),
            stats.len()
        )));
    }
    Ok(axes
        .iter()
        .zip(stats)
        .map(|(a, s)| a.iter().map(|&v| s.denormalize(v)).collect())
        .collect())
}
