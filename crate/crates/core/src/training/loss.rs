//! Softmax cross-entropy loss.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Floor applied to probabilities before the log.
pub const PROB_FLOOR: f64 = 1e-15;

/// Mean over the batch of `-sum_k y_k ln(p_k)`.
pub fn cross_entropy_loss(probs: &Tensor, one_hots: &Tensor) -> Result<f64> {
    if probs.ndim() != 2 || probs.shape() != one_hots.shape() {
        return Err(Error::ShapeMismatch(format!(
            "probabilities {:?} vs labels {:?}",
            probs.shape(),
            one_hots.shape()
        )));
    }
    let n = probs.rows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let mut total = 0.0;
    for row in 0..n {
        for (p, y) in probs.row(row).iter().zip(one_hots.row(row)) {
            if *y != 0.0 {
                total -= y * p.max(PROB_FLOOR).ln();
            }
        }
    }
    Ok(total / n as f64)
}

/// Gradient of the mean cross-entropy w.r.t. the logits feeding the softmax:
/// `(p - y) / n` per row. Exact for the softmax + cross-entropy composite.
pub fn cross_entropy_logit_grad(probs: &Tensor, one_hots: &Tensor) -> Tensor {
    let n = probs.rows() as f64;
    let mut out = probs.clone();
    for (o, y) in out.data_mut().iter_mut().zip(one_hots.data()) {
        *o = (*o - y) / n;
    }
    out
}
