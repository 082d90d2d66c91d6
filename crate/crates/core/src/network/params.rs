//! Trainable parameters for every model kind, with a stable named layout.
//!
//! The named, ordered view ([`ModelParams::views`]) is what the optimizer
//! state, the finite-difference oracle, and the checkpoint format all share;
//! its order must never change across versions.

use crate::error::{Error, Result};
use crate::network::attention::AttentionParams;
use crate::network::dense::{Activation, DenseParams};
use crate::network::lstm::{GateParams, LstmParams};
use crate::network::ModelConfig;
use crate::rng::new_rng;
use crate::tensor::Tensor;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Per-timestep embedding stack (shared across timesteps).
    pub embed: Vec<DenseParams>,
    /// Stacked LSTM layers, bottom first.
    pub lstm: Vec<LstmParams>,
    pub attention: Option<AttentionParams>,
    /// Hidden dense stack of the MLP kind.
    pub hidden: Vec<DenseParams>,
    /// Output layer; softmax is applied outside.
    pub head: DenseParams,
}

/// Read-only view of one named parameter array.
pub struct ParamView<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: &'a [f64],
}

const GATE_SUFFIXES: [&str; 4] = ["i", "f", "o", "m"];

impl ModelParams {
    /// All-zero parameters with the shapes the config demands.
    pub fn zeros(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut embed = Vec::new();
        let mut width = 1;
        for &w in &config.embed_widths {
            embed.push(DenseParams::zeros(width, w, Activation::Tanh));
            width = w;
        }
        let mut lstm = Vec::new();
        let mut lstm_in = width;
        for _ in 0..config.lstm_layers {
            lstm.push(LstmParams::zeros(lstm_in, config.lstm_hidden));
            lstm_in = config.lstm_hidden;
        }
        let attention = if config.kind.has_attention() {
            Some(AttentionParams::zeros(config.lstm_hidden, config.lstm_hidden))
        } else {
            None
        };
        let mut hidden = Vec::new();
        if config.kind.is_mlp() {
            hidden.push(DenseParams::zeros(config.input_len, config.mlp_hidden, Activation::Tanh));
        }
        let head = DenseParams::zeros(config.head_input_width(), config.class_count, Activation::Identity);
        Ok(ModelParams {
            embed,
            lstm,
            attention,
            hidden,
            head,
        })
    }

    /// Seed-deterministic initialization: weights uniform in
    /// `[-1/sqrt(fan_in), +1/sqrt(fan_in)]`, biases zero except the forget
    /// gate bias, which starts at 1.0.
    pub fn init(config: &ModelConfig, seed: u64) -> Result<Self> {
        let mut params = Self::zeros(config)?;
        let mut rng = new_rng(seed);
        for layer in &mut params.embed {
            init_uniform(&mut layer.weights, &mut rng);
        }
        for layer in &mut params.lstm {
            for gate in layer.gates_mut() {
                init_uniform(&mut gate.w, &mut rng);
                init_uniform(&mut gate.u, &mut rng);
            }
            for b in layer.forget.b.iter_mut() {
                *b = 1.0;
            }
        }
        if let Some(attn) = &mut params.attention {
            init_uniform(&mut attn.w_h, &mut rng);
            init_uniform(&mut attn.w_c, &mut rng);
            let scale = 1.0 / (attn.v.len() as f64).sqrt();
            for v in attn.v.iter_mut() {
                *v = rng.random_range(-scale..=scale);
            }
        }
        for layer in &mut params.hidden {
            init_uniform(&mut layer.weights, &mut rng);
        }
        init_uniform(&mut params.head.weights, &mut rng);
        Ok(params)
    }

    /// Same structure, all values zero. Used for gradients and Adam moments.
    pub fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        for values in out.values_mut() {
            for v in values.iter_mut() {
                *v = 0.0;
            }
        }
        out
    }

    /// Named parameter arrays in canonical order.
    pub fn views(&self) -> Vec<ParamView<'_>> {
        let mut out = Vec::new();
        for (l, layer) in self.embed.iter().enumerate() {
            out.push(ParamView {
                name: format!("embed.{}.w", l),
                shape: layer.weights.shape().to_vec(),
                values: layer.weights.data(),
            });
            out.push(ParamView {
                name: format!("embed.{}.b", l),
                shape: vec![layer.bias.len()],
                values: &layer.bias,
            });
        }
        for (l, layer) in self.lstm.iter().enumerate() {
            for (gate, suffix) in layer.gates().into_iter().zip(GATE_SUFFIXES) {
                out.push(ParamView {
                    name: format!("lstm.{}.w_{}", l, suffix),
                    shape: gate.w.shape().to_vec(),
                    values: gate.w.data(),
                });
                out.push(ParamView {
                    name: format!("lstm.{}.u_{}", l, suffix),
                    shape: gate.u.shape().to_vec(),
                    values: gate.u.data(),
                });
                out.push(ParamView {
                    name: format!("lstm.{}.b_{}", l, suffix),
                    shape: vec![gate.b.len()],
                    values: &gate.b,
                });
            }
        }
        if let Some(attn) = &self.attention {
            out.push(ParamView {
                name: "attn.w_h".into(),
                shape: attn.w_h.shape().to_vec(),
                values: attn.w_h.data(),
            });
            out.push(ParamView {
                name: "attn.w_c".into(),
                shape: attn.w_c.shape().to_vec(),
                values: attn.w_c.data(),
            });
            out.push(ParamView {
                name: "attn.b_a".into(),
                shape: vec![attn.b_a.len()],
                values: &attn.b_a,
            });
            out.push(ParamView {
                name: "attn.v".into(),
                shape: vec![attn.v.len()],
                values: &attn.v,
            });
        }
        for (l, layer) in self.hidden.iter().enumerate() {
            out.push(ParamView {
                name: format!("hidden.{}.w", l),
                shape: layer.weights.shape().to_vec(),
                values: layer.weights.data(),
            });
            out.push(ParamView {
                name: format!("hidden.{}.b", l),
                shape: vec![layer.bias.len()],
                values: &layer.bias,
            });
        }
        out.push(ParamView {
            name: "head.w".into(),
            shape: self.head.weights.shape().to_vec(),
            values: self.head.weights.data(),
        });
        out.push(ParamView {
            name: "head.b".into(),
            shape: vec![self.head.bias.len()],
            values: &self.head.bias,
        });
        out
    }

    /// Mutable arrays in the same canonical order as [`views`](Self::views).
    pub fn values_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.embed {
            out.push(layer.weights.data_mut());
            out.push(&mut layer.bias);
        }
        for layer in &mut self.lstm {
            for gate in layer.gates_mut() {
                let GateParams { w, u, b } = gate;
                out.push(w.data_mut());
                out.push(u.data_mut());
                out.push(b);
            }
        }
        if let Some(attn) = &mut self.attention {
            out.push(attn.w_h.data_mut());
            out.push(attn.w_c.data_mut());
            out.push(&mut attn.b_a);
            out.push(&mut attn.v);
        }
        for layer in &mut self.hidden {
            out.push(layer.weights.data_mut());
            out.push(&mut layer.bias);
        }
        out.push(self.head.weights.data_mut());
        out.push(&mut self.head.bias);
        out
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.views().iter().map(|v| v.values.len()).sum()
    }

    /// Check that two parameter sets share the same named layout.
    pub fn layout_matches(&self, other: &Self) -> Result<()> {
        let a = self.views();
        let b = other.views();
        if a.len() != b.len() {
            return Err(Error::ShapeMismatch(format!(
                "parameter sets have {} vs {} arrays",
                a.len(),
                b.len()
            )));
        }
        for (x, y) in a.iter().zip(b.iter()) {
            if x.name != y.name || x.shape != y.shape {
                return Err(Error::ShapeMismatch(format!(
                    "parameter {} {:?} vs {} {:?}",
                    x.name, x.shape, y.name, y.shape
                )));
            }
        }
        Ok(())
    }
}

fn init_uniform(t: &mut Tensor, rng: &mut ChaCha8Rng) {
    let fan_in = t.shape()[0] as f64;
    let scale = 1.0 / fan_in.sqrt();
    for v in t.data_mut().iter_mut() {
        *v = rng.random_range(-scale..=scale);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ModelKind;

    #[test]
    fn views_and_values_mut_are_aligned() {
        for kind in [ModelKind::DeepBrain, ModelKind::StackedLstm, ModelKind::PlainLstm, ModelKind::Mlp] {
            let config = ModelConfig::new(kind);
            let mut params = ModelParams::init(&config, 3).unwrap();
            let lens: Vec<usize> = params.views().iter().map(|v| v.values.len()).collect();
            let mut_lens: Vec<usize> = params.values_mut().iter().map(|v| v.len()).collect();
            assert_eq!(lens, mut_lens, "kind {:?}", kind);
        }
    }

    #[test]
    fn init_is_seed_deterministic() {
        let config = ModelConfig::new(ModelKind::DeepBrain);
        let a = ModelParams::init(&config, 11).unwrap();
        let b = ModelParams::init(&config, 11).unwrap();
        assert_eq!(a, b);
        let c = ModelParams::init(&config, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let config = ModelConfig::new(ModelKind::StackedLstm);
        let p = ModelParams::init(&config, 5).unwrap();
        for layer in &p.lstm {
            assert!(layer.forget.b.iter().all(|&b| b == 1.0));
            assert!(layer.input.b.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn names_are_unique() {
        let config = ModelConfig::new(ModelKind::DeepBrain);
        let p = ModelParams::zeros(&config).unwrap();
        let mut names: Vec<String> = p.views().into_iter().map(|v| v.name).collect();
        let total = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), total);
    }
}
