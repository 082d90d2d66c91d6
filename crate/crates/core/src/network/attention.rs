//! Additive attention over the top LSTM layer's hidden sequence, queried by
//! the final cell state.
//!
//! Raw score for timestep t: `e_t = v . tanh(h_t W_h + c_T W_c + b_a)`.
//! Weights are the softmax of the raw scores over t; the context vector is
//! the weight-averaged hidden sequence.

use crate::error::{Error, Result};
use crate::network::softmax;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    /// Hidden projection `[hidden, attn]`.
    pub w_h: Tensor,
    /// Cell-query projection `[hidden, attn]`.
    pub w_c: Tensor,
    /// Score bias `[attn]`.
    pub b_a: Vec<f64>,
    /// Score vector `[attn]`.
    pub v: Vec<f64>,
}

impl AttentionParams {
    pub fn zeros(hidden: usize, attn: usize) -> Self {
        AttentionParams {
            w_h: Tensor::zeros(&[hidden, attn]),
            w_c: Tensor::zeros(&[hidden, attn]),
            b_a: vec![0.0; attn],
            v: vec![0.0; attn],
        }
    }

    pub fn hidden_width(&self) -> usize {
        self.w_h.shape()[0]
    }

    pub fn attn_width(&self) -> usize {
        self.w_h.shape()[1]
    }
}

#[derive(Debug, Clone)]
pub struct AttnCache {
    /// Per-timestep tanh outputs `[n, attn]`.
    pub u: Vec<Tensor>,
    /// Normalized weights `[n, T]`.
    pub weights: Tensor,
    /// Context vectors `[n, hidden]`.
    pub context: Tensor,
}

/// Returns `(context, weights, cache)`.
pub fn attention_forward(
    hidden_seq: &[Tensor],
    final_c: &Tensor,
    p: &AttentionParams,
) -> Result<(Tensor, Tensor, AttnCache)> {
    if hidden_seq.is_empty() {
        return Err(Error::InvalidArgument("attention needs at least one timestep".into()));
    }
    let n = hidden_seq[0].rows();
    let hw = p.hidden_width();
    for h in hidden_seq {
        if h.shape() != [n, hw] {
            return Err(Error::ShapeMismatch(format!(
                "hidden state must be [{}, {}], got {:?}",
                n,
                hw,
                h.shape()
            )));
        }
    }
    if final_c.shape() != [n, hw] {
        return Err(Error::ShapeMismatch(format!(
            "attention query must be [{}, {}], got {:?}",
            n,
            hw,
            final_c.shape()
        )));
    }
    let steps = hidden_seq.len();
    let query = final_c.matmul(&p.w_c);
    let mut scores = Tensor::zeros(&[n, steps]);
    let mut u_cache = Vec::with_capacity(steps);
    for (t, h_t) in hidden_seq.iter().enumerate() {
        let mut z = h_t.matmul(&p.w_h);
        z.add_assign(&query);
        z.add_row(&p.b_a);
        let u = z.map(f64::tanh);
        for row in 0..n {
            let e: f64 = u.row(row).iter().zip(p.v.iter()).map(|(a, b)| a * b).sum();
            scores.set(row, t, e);
        }
        u_cache.push(u);
    }
    let weights = softmax(&scores)?;
    let mut context = Tensor::zeros(&[n, hw]);
    for (t, h_t) in hidden_seq.iter().enumerate() {
        for row in 0..n {
            let w = weights.at(row, t);
            let ctx_row = context.row_mut(row);
            for (cv, hv) in ctx_row.iter_mut().zip(h_t.row(row)) {
                *cv += w * hv;
            }
        }
    }
    Ok((
        context.clone(),
        weights.clone(),
        AttnCache {
            u: u_cache,
            weights,
            context,
        },
    ))
}

/// Backward pass. `d_context` is the gradient arriving at the context vector.
/// Returns `(param grads, per-timestep dh additions, d final_c)`.
pub fn attention_backward(
    hidden_seq: &[Tensor],
    final_c: &Tensor,
    cache: &AttnCache,
    p: &AttentionParams,
    d_context: &Tensor,
) -> (AttentionParams, Vec<Tensor>, Tensor) {
    let steps = hidden_seq.len();
    let n = d_context.rows();
    let hw = p.hidden_width();
    let aw = p.attn_width();
    let mut grads = AttentionParams::zeros(hw, aw);
    let mut dh: Vec<Tensor> = vec![Tensor::zeros(&[n, hw]); steps];
    let mut dc_final = Tensor::zeros(&[n, hw]);

    // context = sum_t alpha_t h_t
    let mut d_alpha = Tensor::zeros(&[n, steps]);
    for (t, h_t) in hidden_seq.iter().enumerate() {
        for row in 0..n {
            let dot: f64 = d_context
                .row(row)
                .iter()
                .zip(h_t.row(row))
                .map(|(a, b)| a * b)
                .sum();
            d_alpha.set(row, t, dot);
            let w = cache.weights.at(row, t);
            for (dhv, dcv) in dh[t].row_mut(row).iter_mut().zip(d_context.row(row)) {
                *dhv += w * dcv;
            }
        }
    }

    // softmax backward: de = alpha * (d_alpha - sum_s alpha_s d_alpha_s)
    let mut d_e = Tensor::zeros(&[n, steps]);
    for row in 0..n {
        let inner: f64 = cache
            .weights
            .row(row)
            .iter()
            .zip(d_alpha.row(row))
            .map(|(a, b)| a * b)
            .sum();
        for t in 0..steps {
            let a = cache.weights.at(row, t);
            d_e.set(row, t, a * (d_alpha.at(row, t) - inner));
        }
    }

    for (t, h_t) in hidden_seq.iter().enumerate() {
        let u = &cache.u[t];
        // du = de_t (outer) v; da = du * (1 - u^2)
        let mut da = Tensor::zeros(&[n, aw]);
        for row in 0..n {
            let de = d_e.at(row, t);
            for (j, dav) in da.row_mut(row).iter_mut().enumerate() {
                let uv = u.at(row, j);
                *dav = de * p.v[j] * (1.0 - uv * uv);
            }
            for (gv, &uv) in grads.v.iter_mut().zip(u.row(row)) {
                *gv += de * uv;
            }
        }
        grads.w_h.add_assign(&h_t.t_matmul(&da));
        grads.w_c.add_assign(&final_c.t_matmul(&da));
        for (b, s) in grads.b_a.iter_mut().zip(da.col_sums()) {
            *b += s;
        }
        dh[t].add_assign(&da.matmul_t(&p.w_h));
        dc_final.add_assign(&da.matmul_t(&p.w_c));
    }
    (grads, dh, dc_final)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hidden_fixture() -> Vec<Tensor> {
        vec![
            Tensor::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]),
            Tensor::from_rows(&[vec![3.0, 4.0], vec![1.0, 0.0]]),
            Tensor::from_rows(&[vec![5.0, 0.0], vec![2.0, 2.0]]),
        ]
    }

    #[test]
    fn zero_parameters_give_uniform_weights_and_mean_context() {
        let hidden = hidden_fixture();
        let final_c = Tensor::zeros(&[2, 2]);
        let p = AttentionParams::zeros(2, 2);
        let (context, weights, _) = attention_forward(&hidden, &final_c, &p).unwrap();
        for row in 0..2 {
            for t in 0..3 {
                assert!((weights.at(row, t) - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        // context equals the mean of the hidden states
        for row in 0..2 {
            for j in 0..2 {
                let mean = (hidden[0].at(row, j) + hidden[1].at(row, j) + hidden[2].at(row, j)) / 3.0;
                assert!((context.at(row, j) - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weights_are_a_distribution() {
        let hidden = hidden_fixture();
        let final_c = Tensor::from_rows(&[vec![0.5, -0.5], vec![1.0, 0.0]]);
        let mut p = AttentionParams::zeros(2, 3);
        p.v = vec![0.3, -0.7, 0.2];
        p.w_h.data_mut().iter_mut().enumerate().for_each(|(k, v)| *v = (k as f64 - 2.0) * 0.25);
        p.w_c.data_mut().iter_mut().enumerate().for_each(|(k, v)| *v = (k as f64) * 0.1);
        let (_, weights, _) = attention_forward(&hidden, &final_c, &p).unwrap();
        for row in 0..2 {
            let sum: f64 = weights.row(row).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(weights.row(row).iter().all(|&w| w > 0.0 && w < 1.0));
        }
    }

    #[test]
    fn single_timestep_gets_full_weight() {
        let hidden = vec![Tensor::from_rows(&[vec![0.7, -0.3]])];
        let final_c = Tensor::from_rows(&[vec![0.1, 0.2]]);
        let mut p = AttentionParams::zeros(2, 2);
        p.v = vec![1.0, 1.0];
        let (context, weights, _) = attention_forward(&hidden, &final_c, &p).unwrap();
        assert_eq!(weights.data(), &[1.0]);
        assert_eq!(context.data(), hidden[0].data());
    }
}
