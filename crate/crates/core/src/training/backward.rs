//! Exact gradients via backpropagation through time, for every model kind.
//!
//! The sweep mirrors the forward composition in reverse: softmax +
//! cross-entropy collapse to `(p - y)/n` at the logits, the head and (for
//! DeepBrain) the dropout mask and attention branch distribute gradients
//! onto the top hidden sequence, then each LSTM layer unrolls backward over
//! all timesteps, and finally the shared embedding stack accumulates over
//! timesteps.

use crate::error::{Error, Result};
use crate::network::attention::attention_backward;
use crate::network::dense::{dense_backward, dense_backward_from_dz};
use crate::network::lstm::lstm_layer_backward;
use crate::network::{ForwardTrace, ModelConfig, ModelParams};
use crate::tensor::Tensor;
use crate::training::loss::cross_entropy_logit_grad;

/// Gradients use the same named layout as the parameters they mirror.
pub type GradientSet = ModelParams;

fn add_bias(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

fn split_concat(d: &Tensor, width: usize) -> (Tensor, Tensor) {
    let n = d.rows();
    let mut left = Tensor::zeros(&[n, width]);
    let mut right = Tensor::zeros(&[n, width]);
    for row in 0..n {
        left.row_mut(row).copy_from_slice(&d.row(row)[..width]);
        right.row_mut(row).copy_from_slice(&d.row(row)[width..]);
    }
    (left, right)
}

/// Gradients of `cross_entropy_loss(model_forward(...))` w.r.t. every named
/// parameter. `trace` must come from a training-mode forward over exactly
/// this batch.
pub fn backward(
    config: &ModelConfig,
    params: &ModelParams,
    trace: &ForwardTrace,
    batch: &Tensor,
    one_hots: &Tensor,
) -> Result<GradientSet> {
    let n = batch.shape()[0];
    let steps = config.input_len;
    if trace.probs.shape() != [n, config.class_count] || one_hots.shape() != [n, config.class_count]
    {
        return Err(Error::Contract(
            "trace does not match this batch (stale or truncated)".into(),
        ));
    }
    let mut grads = params.zeros_like();
    let dlogits = cross_entropy_logit_grad(&trace.probs, one_hots);

    // output layer (identity activation, softmax handled in dlogits)
    let (dw_head, db_head, d_head_in) =
        dense_backward_from_dz(&trace.head_input, &dlogits, &params.head);
    grads.head.weights = dw_head;
    grads.head.bias = db_head;

    if config.kind.is_mlp() {
        let flat = Tensor::from_vec(&[n, steps], batch.data().to_vec()).expect("reshape");
        let mut d = d_head_in;
        for l in (0..params.hidden.len()).rev() {
            let input = if l == 0 { &flat } else { &trace.hidden_acts[l - 1] };
            let (dw, db, dx) = dense_backward(input, &trace.hidden_acts[l], &d, &params.hidden[l]);
            grads.hidden[l].weights = dw;
            grads.hidden[l].bias = db;
            d = dx;
        }
        return Ok(grads);
    }

    if trace.lstm.len() != params.lstm.len() || trace.lstm[0].steps() != steps {
        return Err(Error::Contract("trace does not cover the full unroll".into()));
    }
    let hw = config.lstm_hidden;
    let top = trace.lstm.last().expect("lstm cache");

    // distribute head/attention gradients onto the top layer
    let mut ext_dh: Vec<Tensor> = vec![Tensor::zeros(&[n, hw]); steps];
    let mut ext_dc_final: Option<Tensor> = None;
    if config.kind.has_attention() {
        let masked = match &trace.dropout_mask {
            Some(mask) => d_head_in.hadamard(mask),
            None => d_head_in,
        };
        let (d_h_final, d_context) = split_concat(&masked, hw);
        ext_dh[steps - 1].add_assign(&d_h_final);
        let attn_params = params.attention.as_ref().expect("attention params");
        let attn_cache = trace
            .attn
            .as_ref()
            .ok_or_else(|| Error::Contract("missing attention cache in trace".into()))?;
        let (attn_grads, dh_attn, dc_final) =
            attention_backward(&top.h, top.final_c(), attn_cache, attn_params, &d_context);
        for (dst, src) in ext_dh.iter_mut().zip(dh_attn.iter()) {
            dst.add_assign(src);
        }
        ext_dc_final = Some(dc_final);
        grads.attention = Some(attn_grads);
    } else {
        ext_dh[steps - 1].add_assign(&d_head_in);
    }

    // raw per-timestep input slices (layer inputs when the embedding is empty)
    let raw_slices: Vec<Tensor> = if params.embed.is_empty() {
        (0..steps).map(|t| batch.time_slice(t)).collect()
    } else {
        Vec::new()
    };

    // LSTM layers, top down
    let mut d_below = ext_dh;
    for l in (0..params.lstm.len()).rev() {
        let xs: &[Tensor] = if l == 0 {
            if params.embed.is_empty() {
                &raw_slices
            } else {
                trace.embed_acts.last().expect("embed cache")
            }
        } else {
            &trace.lstm[l - 1].h
        };
        let (layer_grads, dxs) = lstm_layer_backward(
            xs,
            &trace.lstm[l],
            &params.lstm[l],
            &d_below,
            ext_dc_final.take().as_ref(),
        );
        grads.lstm[l] = layer_grads;
        d_below = dxs;
    }

    // shared embedding stack, accumulated over timesteps
    if !params.embed.is_empty() {
        for (t, d_top) in d_below.into_iter().enumerate() {
            let mut d = d_top;
            for l in (0..params.embed.len()).rev() {
                let input_owned;
                let input: &Tensor = if l == 0 {
                    input_owned = batch.time_slice(t);
                    &input_owned
                } else {
                    &trace.embed_acts[l - 1][t]
                };
                let (dw, db, dx) =
                    dense_backward(input, &trace.embed_acts[l][t], &d, &params.embed[l]);
                grads.embed[l].weights.add_assign(&dw);
                add_bias(&mut grads.embed[l].bias, &db);
                d = dx;
            }
        }
    }

    Ok(grads)
}
