//! Adam optimizer with bias correction.

use crate::error::{Error, Result};
use crate::network::ModelParams;
use crate::training::backward::GradientSet;

#[derive(Debug, Clone)]
pub struct AdamState {
    /// First-moment accumulators, same layout as the parameters.
    pub m: ModelParams,
    /// Second-moment accumulators.
    pub v: ModelParams,
    /// Completed steps.
    pub step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

pub const DEFAULT_LEARNING_RATE: f64 = 1e-4;

impl AdamState {
    pub fn new(params: &ModelParams, learning_rate: f64) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(params: &mut ModelParams, grads: &GradientSet, state: &mut AdamState) -> Result<()> {
    params.layout_matches(grads)?;
    params.layout_matches(&state.m)?;
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let grad_views = grads.views();
    let mut m_arrays = state.m.values_mut();
    let mut v_arrays = state.v.values_mut();
    let mut p_arrays = params.values_mut();
    for a in 0..grad_views.len() {
        let g = grad_views[a].values;
        let m = &mut m_arrays[a];
        let v = &mut v_arrays[a];
        let p = &mut p_arrays[a];
        for k in 0..g.len() {
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            p[k] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}

/// Scale gradients so their global L2 norm is at most `max_norm`.
pub fn clip_global_norm(grads: &mut GradientSet, max_norm: f64) -> Result<f64> {
    if max_norm <= 0.0 {
        return Err(Error::InvalidArgument("clip norm must be positive".into()));
    }
    let norm: f64 = grads
        .views()
        .iter()
        .flat_map(|v| v.values.iter())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        for arr in grads.values_mut() {
            for g in arr.iter_mut() {
                *g *= scale;
            }
        }
    }
    Ok(norm)
}
