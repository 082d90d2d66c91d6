//! Fully connected layer: affine map plus optional tanh.

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Tanh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    /// `[in, out]`
    pub weights: Tensor,
    /// `[out]`
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseParams {
    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        DenseParams {
            weights: Tensor::zeros(&[input, output]),
            bias: vec![0.0; output],
            activation,
        }
    }

    pub fn input_width(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn output_width(&self) -> usize {
        self.weights.shape()[1]
    }
}

/// `activation(x * W + b)` for a `[n, in]` batch.
pub fn dense_forward(x: &Tensor, p: &DenseParams) -> Result<Tensor> {
    if x.ndim() != 2 || x.cols() != p.input_width() {
        return Err(Error::ShapeMismatch(format!(
            "dense expects [n, {}], got {:?}",
            p.input_width(),
            x.shape()
        )));
    }
    let mut z = x.matmul(&p.weights);
    z.add_row(&p.bias);
    Ok(match p.activation {
        Activation::Identity => z,
        Activation::Tanh => z.map(f64::tanh),
    })
}

/// Backward pass. `x` is the layer input, `a` the cached activation output,
/// `da` the gradient arriving at the output. Returns `(dW, db, dx)`.
pub fn dense_backward(x: &Tensor, a: &Tensor, da: &Tensor, p: &DenseParams) -> (Tensor, Vec<f64>, Tensor) {
    let dz = match p.activation {
        Activation::Identity => da.clone(),
        Activation::Tanh => da.hadamard(&a.map(|v| 1.0 - v * v)),
    };
    dense_backward_from_dz(x, &dz, p)
}

/// Backward pass given the pre-activation gradient directly. Used for the
/// output layer, where softmax + cross-entropy supply `dz` in closed form.
pub fn dense_backward_from_dz(x: &Tensor, dz: &Tensor, p: &DenseParams) -> (Tensor, Vec<f64>, Tensor) {
    let dw = x.t_matmul(dz);
    let db = dz.col_sums();
    let dx = dz.matmul_t(&p.weights);
    (dw, db, dx)
}
