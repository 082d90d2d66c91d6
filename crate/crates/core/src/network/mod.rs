//! Forward computation for all model kinds.
//!
//! Every kind consumes a `[n, T, 1]` batch of normalized windows and emits a
//! `[n, 4]` row of class probabilities:
//!
//! * `DeepBrain` — per-timestep embedding (two tanh dense layers), two
//!   stacked LSTM layers, additive attention queried by the final cell state,
//!   `[h_T ‖ context]` concatenation, dropout, dense, softmax.
//! * `StackedLstm` — same trunk without the attention branch; head on `h_T`.
//! * `PlainLstm` — single LSTM layer; head on `h_T`.
//! * `Mlp` — flattens the window into one dense tanh layer, then the head.

pub mod attention;
pub mod dense;
pub mod lstm;
pub mod params;

pub use attention::{attention_forward, AttentionParams, AttnCache};
pub use dense::{dense_backward, dense_backward_from_dz, dense_forward, Activation, DenseParams};
pub use lstm::{
    lstm_cell_forward, lstm_layer_backward, lstm_layer_forward, GateCache, GateParams,
    LstmLayerCache, LstmParams,
};
pub use params::{ModelParams, ParamView};

use crate::error::{Error, Result};
use crate::rng::new_rng;
use crate::tensor::Tensor;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    DeepBrain,
    StackedLstm,
    PlainLstm,
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::DeepBrain,
        ModelKind::StackedLstm,
        ModelKind::PlainLstm,
        ModelKind::Mlp,
    ];

    pub fn has_attention(self) -> bool {
        matches!(self, ModelKind::DeepBrain)
    }

    pub fn is_mlp(self) -> bool {
        matches!(self, ModelKind::Mlp)
    }

    pub fn uses_lstm(self) -> bool {
        !self.is_mlp()
    }

    /// Token accepted on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            ModelKind::DeepBrain => "deepbrain",
            ModelKind::StackedLstm => "stacked",
            ModelKind::PlainLstm => "lstm",
            ModelKind::Mlp => "mlp",
        }
    }

    /// Row label used in comparison tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::DeepBrain => "DeepBrain",
            ModelKind::StackedLstm => "Stacked LSTM",
            ModelKind::PlainLstm => "LSTM",
            ModelKind::Mlp => "MLP",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deepbrain" => Ok(ModelKind::DeepBrain),
            "stacked" => Ok(ModelKind::StackedLstm),
            "lstm" => Ok(ModelKind::PlainLstm),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(Error::InvalidArgument(format!(
                "unknown model kind {:?} (expected deepbrain|stacked|lstm|mlp)",
                other
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Timesteps per window.
    pub input_len: usize,
    /// Widths of the per-timestep embedding stack.
    pub embed_widths: Vec<usize>,
    pub lstm_layers: usize,
    pub lstm_hidden: usize,
    pub mlp_hidden: usize,
    pub dropout_rate: f64,
    pub class_count: usize,
}

impl ModelConfig {
    pub fn new(kind: ModelKind) -> Self {
        let (embed_widths, lstm_layers) = match kind {
            ModelKind::DeepBrain | ModelKind::StackedLstm => (vec![16, 16], 2),
            ModelKind::PlainLstm => (vec![16, 16], 1),
            ModelKind::Mlp => (vec![], 0),
        };
        ModelConfig {
            kind,
            input_len: 30,
            embed_widths,
            lstm_layers,
            lstm_hidden: 32,
            mlp_hidden: 30,
            dropout_rate: 0.2,
            class_count: 4,
        }
    }

    /// Small fixture used by gradient checking: embedding width 2, 3-unit
    /// LSTM layers, 5 timesteps.
    pub fn gradcheck_fixture(kind: ModelKind) -> Self {
        let mut config = ModelConfig::new(kind);
        config.input_len = 5;
        if config.kind.uses_lstm() {
            config.embed_widths = vec![2];
        }
        config.lstm_hidden = 3;
        config.mlp_hidden = 3;
        config
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_count == 0 || self.input_len == 0 {
            return Err(Error::InvalidArgument("class count and input length must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidArgument(format!(
                "dropout rate must be in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        match self.kind {
            ModelKind::Mlp => {
                if self.lstm_layers != 0 || !self.embed_widths.is_empty() {
                    return Err(Error::InvalidArgument(
                        "mlp config cannot request lstm layers or an embedding stack".into(),
                    ));
                }
                if self.mlp_hidden == 0 {
                    return Err(Error::InvalidArgument("mlp hidden width must be >= 1".into()));
                }
            }
            ModelKind::PlainLstm => {
                if self.lstm_layers != 1 {
                    return Err(Error::InvalidArgument("plain lstm uses exactly one layer".into()));
                }
            }
            ModelKind::DeepBrain | ModelKind::StackedLstm => {
                if self.lstm_layers < 1 {
                    return Err(Error::InvalidArgument("stacked kinds need at least one lstm layer".into()));
                }
            }
        }
        if self.kind.uses_lstm() && self.lstm_hidden == 0 {
            return Err(Error::InvalidArgument("lstm hidden width must be >= 1".into()));
        }
        Ok(())
    }

    /// Width of the vector entering the output layer.
    pub fn head_input_width(&self) -> usize {
        match self.kind {
            ModelKind::DeepBrain => 2 * self.lstm_hidden,
            ModelKind::StackedLstm | ModelKind::PlainLstm => self.lstm_hidden,
            ModelKind::Mlp => self.mlp_hidden,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardMode {
    Eval,
    Train { dropout_seed: u64 },
}

/// Cached activations from a training-mode forward pass, sufficient for
/// exact backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `embed_acts[layer][t]` is the `[n, width]` activation output.
    pub embed_acts: Vec<Vec<Tensor>>,
    pub lstm: Vec<LstmLayerCache>,
    pub attn: Option<AttnCache>,
    /// Inverted-dropout multipliers (0 or 1/(1-rate)).
    pub dropout_mask: Option<Tensor>,
    /// The (post-dropout) input that reached the output layer.
    pub head_input: Tensor,
    /// MLP hidden activations.
    pub hidden_acts: Vec<Tensor>,
    pub probs: Tensor,
}

/// Row-wise numerically stable softmax of a `[n, K]` tensor.
pub fn softmax(x: &Tensor) -> Result<Tensor> {
    if x.ndim() != 2 {
        return Err(Error::ShapeMismatch(format!("softmax expects rank 2, got {:?}", x.shape())));
    }
    if !x.is_finite() {
        return Err(Error::InvalidArgument("softmax input must be finite".into()));
    }
    let mut out = x.clone();
    for row in 0..x.rows() {
        let r = out.row_mut(row);
        let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in r.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in r.iter_mut() {
            *v /= sum;
        }
    }
    Ok(out)
}

/// Inverted dropout. Training mode zeroes each element with probability
/// `rate` and scales survivors by `1/(1-rate)`; the returned mask holds the
/// applied multipliers. Eval mode is the identity with no mask.
pub fn dropout_apply(x: &Tensor, rate: f64, mode: ForwardMode) -> Result<(Tensor, Option<Tensor>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!(
            "dropout rate must be in [0, 1), got {}",
            rate
        )));
    }
    match mode {
        ForwardMode::Eval => Ok((x.clone(), None)),
        ForwardMode::Train { dropout_seed } => {
            let keep_scale = 1.0 / (1.0 - rate);
            let mut rng = new_rng(dropout_seed);
            let mut mask = Tensor::zeros(&[x.shape()[0], x.shape()[1]]);
            for v in mask.data_mut().iter_mut() {
                *v = if rng.random::<f64>() < rate { 0.0 } else { keep_scale };
            }
            Ok((x.hadamard(&mask), Some(mask)))
        }
    }
}

fn check_batch(config: &ModelConfig, batch: &Tensor) -> Result<()> {
    let shape = batch.shape();
    if shape.len() != 3 || shape[2] != 1 || shape[1] != config.input_len || shape[0] == 0 {
        return Err(Error::ShapeMismatch(format!(
            "batch must be [n, {}, 1] with n >= 1, got {:?}",
            config.input_len, shape
        )));
    }
    Ok(())
}

fn check_params(config: &ModelConfig, params: &ModelParams) -> Result<()> {
    let expected = ModelParams::zeros(config)?;
    params.layout_matches(&expected)
}

/// Flatten a `[n, T, 1]` batch into `[n, T]`.
fn flatten_batch(batch: &Tensor) -> Tensor {
    let (n, t) = (batch.shape()[0], batch.shape()[1]);
    Tensor::from_vec(&[n, t], batch.data().to_vec()).expect("contiguous reshape")
}

/// Run the model over a batch. Returns class probabilities and, in training
/// mode, the trace needed for backpropagation.
pub fn model_forward(
    config: &ModelConfig,
    params: &ModelParams,
    batch: &Tensor,
    mode: ForwardMode,
) -> Result<(Tensor, Option<ForwardTrace>)> {
    config.validate()?;
    check_batch(config, batch)?;
    check_params(config, params)?;
    let steps = config.input_len;

    let mut trace = ForwardTrace {
        embed_acts: vec![Vec::with_capacity(steps); params.embed.len()],
        lstm: Vec::new(),
        attn: None,
        dropout_mask: None,
        head_input: Tensor::zeros(&[1, 1]),
        hidden_acts: Vec::new(),
        probs: Tensor::zeros(&[1, 1]),
    };

    let head_in = if config.kind.is_mlp() {
        let mut x = flatten_batch(batch);
        for layer in &params.hidden {
            x = dense_forward(&x, layer)?;
            trace.hidden_acts.push(x.clone());
        }
        x
    } else {
        // shared embedding applied at every timestep
        let mut xs: Vec<Tensor> = (0..steps).map(|t| batch.time_slice(t)).collect();
        for (l, layer) in params.embed.iter().enumerate() {
            for x in xs.iter_mut() {
                *x = dense_forward(x, layer)?;
            }
            trace.embed_acts[l] = xs.clone();
        }
        for lstm_params in &params.lstm {
            let cache = lstm_layer_forward(&xs, lstm_params, None, None)?;
            xs = cache.h.clone();
            trace.lstm.push(cache);
        }
        let top = trace.lstm.last().expect("lstm kinds have at least one layer");
        let h_final = top.final_h().clone();
        if let Some(attn) = &params.attention {
            let (context, _weights, cache) = attention_forward(&top.h, top.final_c(), attn)?;
            trace.attn = Some(cache);
            // [h_T ‖ context]
            let n = h_final.rows();
            let hw = h_final.cols();
            let mut concat = Tensor::zeros(&[n, 2 * hw]);
            for row in 0..n {
                let dst = concat.row_mut(row);
                dst[..hw].copy_from_slice(h_final.row(row));
                dst[hw..].copy_from_slice(context.row(row));
            }
            let (dropped, mask) = dropout_apply(&concat, config.dropout_rate, mode)?;
            trace.dropout_mask = mask;
            dropped
        } else {
            h_final
        }
    };

    let logits = dense_forward(&head_in, &params.head)?;
    let probs = softmax(&logits)?;
    trace.head_input = head_in;
    trace.probs = probs.clone();

    match mode {
        ForwardMode::Eval => Ok((probs, None)),
        ForwardMode::Train { .. } => Ok((probs, Some(trace))),
    }
}
