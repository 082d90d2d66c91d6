//! Training loop: minibatch BPTT with Adam, per-epoch validation, and
//! best-checkpoint selection.

pub mod adam;
pub mod backward;
pub mod checkpoint;
pub mod finitediff;
pub mod loss;

pub use adam::{adam_step, clip_global_norm, AdamState, DEFAULT_LEARNING_RATE};
pub use backward::{backward, GradientSet};
pub use checkpoint::{dataset_hash, Checkpoint, NamedParam, Provenance, CHECKPOINT_FORMAT_VERSION};
pub use finitediff::{
    finite_diff_grad, gradcheck_fixture_batch, gradient_check, max_relative_error,
    GradCheckReport, DEFAULT_FD_STEP, GRADCHECK_FD_STEP,
};
pub use loss::{cross_entropy_logit_grad, cross_entropy_loss};

use crate::error::{Error, Result};
use crate::network::{model_forward, ForwardMode, ModelConfig, ModelParams};
use crate::preprocess::PreprocessConfig;
use crate::rng::{derive_seed, new_rng};
use crate::signal::{decode_class, Dataset, LabelClass, ProcessedWindow};
use crate::tensor::Tensor;
use rand::seq::SliceRandom;

// substream indices under the training seed
const STREAM_INIT: u64 = 0;
const STREAM_SHUFFLE: u64 = 1;
const STREAM_DROPOUT: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub shuffle_each_epoch: bool,
    /// Overrides the Adam default of 1e-4 when set.
    pub learning_rate: Option<f64>,
    /// Global-norm gradient clipping, off by default.
    pub grad_clip: Option<f64>,
}

impl TrainConfig {
    pub fn new(epochs: usize, seed: u64) -> Self {
        TrainConfig {
            epochs,
            batch_size: 64,
            seed,
            shuffle_each_epoch: true,
            learning_rate: None,
            grad_clip: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument("epochs and batch size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub optimizer_steps: u64,
}

/// Pack windows into a `[n, T, 1]` batch and its `[n, 4]` one-hot labels.
pub fn windows_to_batch(windows: &[&ProcessedWindow]) -> Result<(Tensor, Tensor)> {
    if windows.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let t = windows[0].features.len();
    let n = windows.len();
    let mut data = Vec::with_capacity(n * t);
    let mut labels = Vec::with_capacity(n * 4);
    for w in windows {
        if w.features.len() != t {
            return Err(Error::ShapeMismatch("ragged window lengths".into()));
        }
        data.extend_from_slice(&w.features);
        labels.extend_from_slice(&w.one_hot);
    }
    Ok((
        Tensor::from_vec(&[n, t, 1], data)?,
        Tensor::from_vec(&[n, 4], labels)?,
    ))
}

/// Eval-mode class probabilities for a whole dataset, in order.
pub fn predict_probs(config: &ModelConfig, params: &ModelParams, data: &Dataset) -> Result<Tensor> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    let mut out = Tensor::zeros(&[data.len(), config.class_count]);
    let chunk = 256;
    let mut row = 0;
    for group in data.windows.chunks(chunk) {
        let refs: Vec<&ProcessedWindow> = group.iter().collect();
        let (batch, _) = windows_to_batch(&refs)?;
        let (probs, _) = model_forward(config, params, &batch, ForwardMode::Eval)?;
        for r in 0..probs.rows() {
            out.row_mut(row).copy_from_slice(probs.row(r));
            row += 1;
        }
    }
    Ok(out)
}

/// Argmax classes for a whole dataset.
pub fn predict_classes(config: &ModelConfig, params: &ModelParams, data: &Dataset) -> Result<Vec<LabelClass>> {
    let probs = predict_probs(config, params, data)?;
    (0..probs.rows()).map(|r| decode_class(probs.row(r))).collect()
}

/// Fraction of windows whose argmax matches the label.
pub fn evaluate_accuracy(config: &ModelConfig, params: &ModelParams, data: &Dataset) -> Result<f64> {
    let preds = predict_classes(config, params, data)?;
    let correct = preds
        .iter()
        .zip(data.windows.iter())
        .filter(|(p, w)| **p == w.label())
        .count();
    Ok(correct as f64 / data.len() as f64)
}

/// Train a model, returning the checkpoint with the best validation accuracy
/// (ties keep the earlier epoch) and the per-epoch history.
pub fn train_model(
    config: &ModelConfig,
    tcfg: &TrainConfig,
    train: &Dataset,
    valid: &Dataset,
    preprocess_config: &PreprocessConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    tcfg.validate()?;
    if train.is_empty() || valid.is_empty() {
        return Err(Error::InvalidArgument("training and validation sets must be non-empty".into()));
    }
    if train.windows[0].features.len() != config.input_len {
        return Err(Error::ShapeMismatch(format!(
            "windows have {} features but the model expects {}",
            train.windows[0].features.len(),
            config.input_len
        )));
    }

    let mut params = ModelParams::init(config, derive_seed(tcfg.seed, STREAM_INIT))?;
    let lr = tcfg.learning_rate.unwrap_or(DEFAULT_LEARNING_RATE);
    let mut opt = AdamState::new(&params, lr);
    let shuffle_master = derive_seed(tcfg.seed, STREAM_SHUFFLE);
    let dropout_master = derive_seed(tcfg.seed, STREAM_DROPOUT);

    let n = train.len();
    let batches_per_epoch = n.div_ceil(tcfg.batch_size);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(tcfg.epochs);
    let mut best: Option<(f64, usize, ModelParams)> = None;

    for epoch in 0..tcfg.epochs {
        if tcfg.shuffle_each_epoch {
            order.shuffle(&mut new_rng(derive_seed(shuffle_master, epoch as u64)));
        }
        let mut loss_sum = 0.0;
        for (b, idx) in order.chunks(tcfg.batch_size).enumerate() {
            let refs: Vec<&ProcessedWindow> = idx.iter().map(|&i| &train.windows[i]).collect();
            let (batch, one_hots) = windows_to_batch(&refs)?;
            let dropout_seed =
                derive_seed(dropout_master, (epoch * batches_per_epoch + b) as u64);
            // anything that blows up mid-training (overflowed activations,
            // non-finite loss) is reported as a training failure with its
            // epoch and batch
            let training_err = |message: String| Error::Training {
                epoch,
                batch: b,
                message,
            };
            let (probs, trace) =
                model_forward(config, &params, &batch, ForwardMode::Train { dropout_seed })
                    .map_err(|e| training_err(e.to_string()))?;
            let loss = cross_entropy_loss(&probs, &one_hots)?;
            if !loss.is_finite() {
                return Err(training_err(format!("non-finite loss {}", loss)));
            }
            loss_sum += loss * idx.len() as f64;
            let mut grads = backward(config, &params, &trace.expect("train trace"), &batch, &one_hots)?;
            if let Some(max_norm) = tcfg.grad_clip {
                clip_global_norm(&mut grads, max_norm)?;
            }
            adam_step(&mut params, &grads, &mut opt)?;
        }
        let train_loss = loss_sum / n as f64;
        let valid_accuracy = evaluate_accuracy(config, &params, valid)?;
        history.push(EpochStats {
            epoch,
            train_loss,
            valid_accuracy,
        });
        let improved = match &best {
            None => true,
            Some((acc, _, _)) => valid_accuracy > *acc,
        };
        if improved {
            best = Some((valid_accuracy, epoch, params.clone()));
        }
    }

    let (_, best_epoch, best_params) = best.expect("at least one epoch ran");
    let provenance = Provenance {
        seed: tcfg.seed,
        epochs: tcfg.epochs,
        final_loss: history.last().expect("history").train_loss,
        loss_history: history.iter().map(|h| h.train_loss).collect(),
        dataset_hash: dataset_hash(train),
    };
    let checkpoint = Checkpoint::from_parts(config, &best_params, preprocess_config, provenance);
    Ok(TrainOutcome {
        checkpoint,
        history,
        best_epoch,
        optimizer_steps: opt.step,
    })
}
