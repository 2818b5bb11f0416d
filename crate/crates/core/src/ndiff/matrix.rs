use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Dense row-major matrix. Batches are stored one sample per row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn from_rows<const N: usize>(rows: &[[T; N]]) -> Self {
        Self {
            rows: rows.len(),
            cols: N,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self · wᵀ + bias` where `w` is `out × in`.
    pub fn affine(&self, w: &Matrix<T>, bias: Option<&[T]>) -> Matrix<T> {
        debug_assert_eq!(self.cols, w.cols);
        let mut out = Matrix::zeros(self.rows, w.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            let o = out.row_mut(i);
            for (j, oj) in o.iter_mut().enumerate() {
                let wr = w.row(j);
                let mut acc = T::zero();
                for k in 0..a.len() {
                    acc = acc + a[k] * wr[k];
                }
                *oj = acc + bias.map_or(T::zero(), |b| b[j]);
            }
        }
        out
    }

    /// `self · w` where `w` is `out × in` and `self` is `n × out`: the adjoint
    /// of [`Matrix::affine`] with respect to its input.
    pub fn back_affine(&self, w: &Matrix<T>) -> Matrix<T> {
        debug_assert_eq!(self.cols, w.rows);
        let mut out = Matrix::zeros(self.rows, w.cols);
        for i in 0..self.rows {
            let g = self.row(i);
            let o = out.row_mut(i);
            for (j, &gj) in g.iter().enumerate() {
                if gj == T::zero() {
                    continue;
                }
                for (ok, &wk) in o.iter_mut().zip(w.row(j)) {
                    *ok = *ok + gj * wk;
                }
            }
        }
        out
    }

    /// `acc += gᵀ · a` (the weight adjoint of [`Matrix::affine`]).
    pub fn accumulate_outer(acc: &mut Matrix<T>, g: &Matrix<T>, a: &Matrix<T>) {
        debug_assert_eq!(g.rows, a.rows);
        debug_assert_eq!(acc.shape(), (g.cols, a.cols));
        for i in 0..g.rows {
            let ar = a.row(i);
            for (j, &gj) in g.row(i).iter().enumerate() {
                if gj == T::zero() {
                    continue;
                }
                for (w, &ak) in acc.row_mut(j).iter_mut().zip(ar) {
                    *w = *w + gj * ak;
                }
            }
        }
    }

    /// Column sums.
    pub fn column_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for (o, &v) in out.iter_mut().zip(self.row(i)) {
                *o = *o + v;
            }
        }
        out
    }
}
