//! Central-difference gradient oracle.
//!
//! Perturbs every scalar parameter in turn and re-evaluates the loss, using
//! the same fixed dropout seed for both sides so the masked path is
//! identical. Quadratic in cost, so only usable on tiny fixtures; that is
//! exactly its job — an implementation-independent check of the analytic
//! backpropagation.

use crate::error::Result;
use crate::network::{model_forward, ForwardMode, ModelConfig, ModelParams};
use crate::tensor::Tensor;
use crate::training::backward::GradientSet;
use crate::training::loss::cross_entropy_loss;

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Step used by the gradient-check harness. At 1e-5 the difference quotient
/// amplifies f64 summation noise to ~1e-11 absolute, which shows up as a
/// ~4e-4 relative error on near-zero attention gradients; 1e-4 keeps both
/// the noise and the truncation term comfortably under the 1e-4 gate.
pub const GRADCHECK_FD_STEP: f64 = 1e-4;

fn loss_at(
    config: &ModelConfig,
    params: &ModelParams,
    batch: &Tensor,
    one_hots: &Tensor,
    mode: ForwardMode,
) -> Result<f64> {
    let (probs, _) = model_forward(config, params, batch, mode)?;
    cross_entropy_loss(&probs, one_hots)
}

/// Central differences `(L(p + h) - L(p - h)) / 2h` for every scalar
/// parameter, in the shared named layout.
pub fn finite_diff_grad(
    config: &ModelConfig,
    params: &ModelParams,
    batch: &Tensor,
    one_hots: &Tensor,
    mode: ForwardMode,
    h: f64,
) -> Result<GradientSet> {
    let mut work = params.clone();
    let mut grads = params.zeros_like();
    let array_count = work.values_mut().len();
    for a in 0..array_count {
        let len = work.values_mut()[a].len();
        for k in 0..len {
            let original = work.values_mut()[a][k];
            work.values_mut()[a][k] = original + h;
            let up = loss_at(config, &work, batch, one_hots, mode)?;
            work.values_mut()[a][k] = original - h;
            let down = loss_at(config, &work, batch, one_hots, mode)?;
            work.values_mut()[a][k] = original;
            grads.values_mut()[a][k] = (up - down) / (2.0 * h);
        }
    }
    Ok(grads)
}

/// Worst relative disagreement between two gradient sets, with the parameter
/// name and flat index where it occurs.
pub fn max_relative_error(a: &GradientSet, b: &GradientSet) -> (f64, String) {
    let mut worst = 0.0;
    let mut worst_name = String::from("-");
    for (va, vb) in a.views().into_iter().zip(b.views()) {
        for (k, (&x, &y)) in va.values.iter().zip(vb.values).enumerate() {
            let denom = x.abs().max(y.abs()).max(1e-8);
            let rel = (x - y).abs() / denom;
            if rel > worst {
                worst = rel;
                worst_name = format!("{}[{}]", va.name, k);
            }
        }
    }
    (worst, worst_name)
}

/// One gradient check: analytic backpropagation against central differences.
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_parameter: String,
    pub parameter_count: usize,
}

/// The stock batch used with [`ModelConfig::gradcheck_fixture`]: `n` windows
/// of in-range features and a mix of labels.
pub fn gradcheck_fixture_batch(config: &ModelConfig, n: usize) -> (Tensor, Tensor) {
    let t = config.input_len;
    let mut data = Vec::with_capacity(n * t);
    for i in 0..n {
        for s in 0..t {
            data.push((0.5 + 0.4 * ((i * 13 + s * 5) as f64 * 0.21).sin()).clamp(0.0, 1.0));
        }
    }
    let batch = Tensor::from_vec(&[n, t, 1], data).expect("fixture shape");
    let mut one_hots = Tensor::zeros(&[n, 4]);
    for i in 0..n {
        one_hots.set(i, (i * 2 + 1) % 4, 1.0);
    }
    (batch, one_hots)
}

pub fn gradient_check(
    config: &ModelConfig,
    params: &ModelParams,
    batch: &Tensor,
    one_hots: &Tensor,
    dropout_seed: u64,
    h: f64,
) -> Result<GradCheckReport> {
    let mode = ForwardMode::Train { dropout_seed };
    let (_, trace) = model_forward(config, params, batch, mode)?;
    let analytic = crate::training::backward::backward(
        config,
        params,
        &trace.expect("training mode returns a trace"),
        batch,
        one_hots,
    )?;
    let numeric = finite_diff_grad(config, params, batch, one_hots, mode, h)?;
    let (max_rel, worst) = max_relative_error(&analytic, &numeric);
    Ok(GradCheckReport {
        max_relative_error: max_rel,
        worst_parameter: worst,
        parameter_count: params.scalar_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{ModelKind, ParamView};

    #[test]
    fn backward_matches_finite_differences_on_every_kind() {
        for kind in ModelKind::ALL {
            let config = ModelConfig::gradcheck_fixture(kind);
            let params = ModelParams::init(&config, 17).unwrap();
            let (batch, one_hots) = gradcheck_fixture_batch(&config, 3);
            let report = gradient_check(&config, &params, &batch, &one_hots, 23, GRADCHECK_FD_STEP).unwrap();
            assert!(
                report.max_relative_error < 1e-4,
                "kind {:?}: max rel err {} at {}",
                kind,
                report.max_relative_error,
                report.worst_parameter
            );
        }
    }

    #[test]
    fn halving_h_shrinks_the_discrepancy() {
        // second-order convergence on a smooth fixture: the h/2 error should
        // be roughly a quarter of the h error (allow a generous factor)
        let config = ModelConfig::gradcheck_fixture(ModelKind::StackedLstm);
        let params = ModelParams::init(&config, 3).unwrap();
        let (batch, one_hots) = gradcheck_fixture_batch(&config, 2);
        let mode = ForwardMode::Train { dropout_seed: 1 };
        let (_, trace) = model_forward(&config, &params, &batch, mode).unwrap();
        let analytic =
            crate::training::backward::backward(&config, &params, &trace.unwrap(), &batch, &one_hots)
                .unwrap();
        let coarse = finite_diff_grad(&config, &params, &batch, &one_hots, mode, 1e-3).unwrap();
        let fine = finite_diff_grad(&config, &params, &batch, &one_hots, mode, 5e-4).unwrap();
        let (err_coarse, _) = max_relative_error(&analytic, &coarse);
        let (err_fine, _) = max_relative_error(&analytic, &fine);
        assert!(
            err_fine < err_coarse * 0.6,
            "no convergence: h err {}, h/2 err {}",
            err_coarse,
            err_fine
        );
    }

    #[test]
    fn finite_differences_match_an_analytic_derivative() {
        // Mlp with a single 1x1 tanh unit: the loss derivative w.r.t. the
        // hidden weight has a closed form we can compute by hand.
        let mut config = ModelConfig::new(ModelKind::Mlp);
        config.input_len = 1;
        config.mlp_hidden = 1;
        let mut params = ModelParams::zeros(&config).unwrap();
        params.hidden[0].weights.data_mut()[0] = 0.8; // w
        params.hidden[0].bias[0] = 0.1;
        let head_w = [0.5, -0.3, 0.2, 0.0];
        params.head.weights = Tensor::from_vec(&[1, 4], head_w.to_vec()).unwrap();

        let x = 0.6;
        let batch = Tensor::from_vec(&[1, 1, 1], vec![x]).unwrap();
        let mut one_hots = Tensor::zeros(&[1, 4]);
        one_hots.set(0, 2, 1.0);

        let mode = ForwardMode::Train { dropout_seed: 0 };
        let numeric = finite_diff_grad(&config, &params, &batch, &one_hots, mode, 1e-6).unwrap();

        // dL/dw = sum_k (p_k - y_k) W_head[0,k] * (1 - z^2) * x
        let z = (x * 0.8 + 0.1).tanh();
        let logits: Vec<f64> = head_w.iter().map(|w| z * w).collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let probs: Vec<f64> = exps.iter().map(|e| e / sum).collect();
        let mut analytic = 0.0;
        for k in 0..4 {
            let y = if k == 2 { 1.0 } else { 0.0 };
            analytic += (probs[k] - y) * head_w[k];
        }
        analytic *= (1.0 - z * z) * x;

        let numeric_w = numeric
            .views()
            .into_iter()
            .find(|v: &ParamView| v.name == "hidden.0.w")
            .unwrap()
            .values[0];
        assert!(
            (numeric_w - analytic).abs() < 1e-8,
            "numeric {} vs analytic {}",
            numeric_w,
            analytic
        );
    }
}
