//! Minimal dense tensor used by the network and the optimizer.
//!
//! Values are stored flat in row-major order. Most of the crate works with
//! rank-2 tensors (matrices); batched windows are rank-3 `[n, T, 1]` and are
//! sliced per timestep before any arithmetic.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let expect: usize = shape.iter().product();
        if data.len() != expect {
            return Err(Error::ShapeMismatch(format!(
                "shape {:?} wants {} values, got {}",
                shape,
                expect,
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Rank-2 constructor from rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Tensor {
            shape: vec![r, c],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.ndim(), 2);
        self.data[i * self.shape[1] + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert_eq!(self.ndim(), 2);
        self.data[i * self.shape[1] + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.shape[1];
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.shape[1];
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Matrix product of two rank-2 tensors, `[n,k] x [k,m] -> [n,m]`.
    pub fn matmul(&self, rhs: &Tensor) -> Tensor {
        assert_eq!(self.ndim(), 2);
        assert_eq!(rhs.ndim(), 2);
        let (n, k) = (self.shape[0], self.shape[1]);
        let (k2, m) = (rhs.shape[0], rhs.shape[1]);
        assert_eq!(k, k2, "matmul inner dims {} vs {}", k, k2);
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            let lrow = &self.data[i * k..(i + 1) * k];
            let orow = &mut out[i * m..(i + 1) * m];
            for (p, &lv) in lrow.iter().enumerate() {
                if lv == 0.0 {
                    continue;
                }
                let rrow = &rhs.data[p * m..(p + 1) * m];
                for (o, &rv) in orow.iter_mut().zip(rrow.iter()) {
                    *o += lv * rv;
                }
            }
        }
        Tensor {
            shape: vec![n, m],
            data: out,
        }
    }

    /// `self^T * rhs` for rank-2 tensors, `[n,k]^T x [n,m] -> [k,m]`.
    /// Used by weight-gradient accumulation without materializing transposes.
    pub fn t_matmul(&self, rhs: &Tensor) -> Tensor {
        assert_eq!(self.ndim(), 2);
        assert_eq!(rhs.ndim(), 2);
        let (n, k) = (self.shape[0], self.shape[1]);
        let (n2, m) = (rhs.shape[0], rhs.shape[1]);
        assert_eq!(n, n2, "t_matmul outer dims {} vs {}", n, n2);
        let mut out = vec![0.0; k * m];
        for i in 0..n {
            let lrow = &self.data[i * k..(i + 1) * k];
            let rrow = &rhs.data[i * m..(i + 1) * m];
            for (p, &lv) in lrow.iter().enumerate() {
                if lv == 0.0 {
                    continue;
                }
                let orow = &mut out[p * m..(p + 1) * m];
                for (o, &rv) in orow.iter_mut().zip(rrow.iter()) {
                    *o += lv * rv;
                }
            }
        }
        Tensor {
            shape: vec![k, m],
            data: out,
        }
    }

    /// `self * rhs^T` for rank-2 tensors, `[n,k] x [m,k]^T -> [n,m]`.
    /// Used to push gradients back through a weight matrix.
    pub fn matmul_t(&self, rhs: &Tensor) -> Tensor {
        assert_eq!(self.ndim(), 2);
        assert_eq!(rhs.ndim(), 2);
        let (n, k) = (self.shape[0], self.shape[1]);
        let (m, k2) = (rhs.shape[0], rhs.shape[1]);
        assert_eq!(k, k2, "matmul_t inner dims {} vs {}", k, k2);
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            let lrow = &self.data[i * k..(i + 1) * k];
            for j in 0..m {
                let rrow = &rhs.data[j * k..(j + 1) * k];
                let mut acc = 0.0;
                for p in 0..k {
                    acc += lrow[p] * rrow[p];
                }
                out[i * m + j] = acc;
            }
        }
        Tensor {
            shape: vec![n, m],
            data: out,
        }
    }

    /// Add a bias row to every row of a rank-2 tensor.
    pub fn add_row(&mut self, bias: &[f64]) {
        let c = self.shape[1];
        assert_eq!(bias.len(), c);
        for row in self.data.chunks_mut(c) {
            for (v, b) in row.iter_mut().zip(bias.iter()) {
                *v += b;
            }
        }
    }

    /// Column sums of a rank-2 tensor.
    pub fn col_sums(&self) -> Vec<f64> {
        let c = self.shape[1];
        let mut out = vec![0.0; c];
        for row in self.data.chunks(c) {
            for (o, v) in out.iter_mut().zip(row.iter()) {
                *o += v;
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Element-wise product (shapes must match).
    pub fn hadamard(&self, rhs: &Tensor) -> Tensor {
        assert_eq!(self.shape, rhs.shape);
        Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn add(&self, rhs: &Tensor) -> Tensor {
        assert_eq!(self.shape, rhs.shape);
        Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn add_assign(&mut self, rhs: &Tensor) {
        assert_eq!(self.shape, rhs.shape);
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
    }

    pub fn scale(&self, s: f64) -> Tensor {
        self.map(|v| v * s)
    }

    /// Timestep slice of a rank-3 `[n, T, d]` tensor as a `[n, d]` matrix.
    pub fn time_slice(&self, t: usize) -> Tensor {
        assert_eq!(self.ndim(), 3);
        let (n, steps, d) = (self.shape[0], self.shape[1], self.shape[2]);
        assert!(t < steps);
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            let base = (i * steps + t) * d;
            data.extend_from_slice(&self.data[base..base + d]);
        }
        Tensor {
            shape: vec![n, d],
            data,
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_basics() {
        let a = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = Tensor::from_rows(&[vec![5.0, 6.0], vec![7.0, 8.0]]);
        let c = a.matmul(&b);
        assert_eq!(c.data(), &[19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn transposed_products_agree_with_explicit_transpose() {
        let a = Tensor::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        let b = Tensor::from_rows(&[vec![1.0, 0.5], vec![-1.0, 2.0]]);
        let atb = a.t_matmul(&b); // [2,3]^T x [2,2] -> [3,2]
        assert_eq!(atb.shape(), &[3, 2]);
        assert_eq!(atb.at(0, 0), 1.0 * 1.0 + 4.0 * -1.0);
        let bat = b.matmul_t(&atb); // [2,2] x [3,2]^T -> [2,3]
        assert_eq!(bat.shape(), &[2, 3]);
        assert_eq!(bat.at(0, 0), b.at(0, 0) * atb.at(0, 0) + b.at(0, 1) * atb.at(0, 1));
    }

    #[test]
    fn time_slice_extracts_columns() {
        let t = Tensor::from_vec(&[2, 3, 1], vec![0.0, 1.0, 2.0, 10.0, 11.0, 12.0]).unwrap();
        assert_eq!(t.time_slice(1).data(), &[1.0, 11.0]);
    }
}
