//! Streaming inference: slide a 180-sample buffer over a score stream, run
//! the full preprocess + forward pipeline every `stride` samples, smooth the
//! decisions with a majority vote, and emit a command whenever the smoothed
//! class changes.

use crate::error::{Error, Result};
use crate::network::{model_forward, ForwardMode, ModelConfig, ModelParams};
use crate::preprocess::{preprocess_values, PreprocessConfig};
use crate::signal::{decode_class, LabelClass, CLASS_COUNT, SESSION_LEN};
use crate::tensor::Tensor;
use crate::training::Checkpoint;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::io::{BufRead, Write};

/// Total mapping from class to robot command string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandMap {
    commands: [String; CLASS_COUNT],
}

impl Default for CommandMap {
    fn default() -> Self {
        CommandMap {
            commands: [
                "stop".to_string(),       // Relaxed
                "start_task".to_string(), // RelaxedToFocused
                "end_task".to_string(),   // FocusedToRelaxed
                "forward".to_string(),    // Focused
            ],
        }
    }
}

impl CommandMap {
    pub fn get(&self, class: LabelClass) -> &str {
        &self.commands[class.index()]
    }

    pub fn set(&mut self, class: LabelClass, command: impl Into<String>) {
        self.commands[class.index()] = command.into();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamConfig {
    /// Samples between inferences once the buffer is full.
    pub stride: usize,
    /// Majority vote over the last k decisions; must be odd.
    pub smoothing_votes: usize,
    pub command_map: CommandMap,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            stride: 30,
            smoothing_votes: 3,
            command_map: CommandMap::default(),
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::InvalidArgument("stride must be >= 1".into()));
        }
        if self.smoothing_votes == 0 || self.smoothing_votes % 2 == 0 {
            return Err(Error::InvalidArgument("smoothing votes must be odd and >= 1".into()));
        }
        Ok(())
    }
}

/// A checkpoint unpacked for repeated inference.
pub struct StreamClassifier {
    config: ModelConfig,
    params: ModelParams,
    preprocess: PreprocessConfig,
}

impl StreamClassifier {
    pub fn from_checkpoint(checkpoint: &Checkpoint) -> Result<Self> {
        Ok(StreamClassifier {
            config: checkpoint.model_config.clone(),
            params: checkpoint.to_params()?,
            preprocess: checkpoint.preprocess_config.clone(),
        })
    }

    /// Classify one full 180-sample window using the checkpoint's embedded
    /// preprocessing, eval-mode forward, and argmax decoding.
    pub fn classify_window(&self, raw_window: &[f64]) -> Result<(LabelClass, Vec<f64>)> {
        if raw_window.len() != SESSION_LEN {
            return Err(Error::InvalidArgument(format!(
                "window must have {} samples, got {}",
                SESSION_LEN,
                raw_window.len()
            )));
        }
        if !raw_window.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("window contains non-finite samples".into()));
        }
        let features = preprocess_values(raw_window, &self.preprocess)?;
        let batch = Tensor::from_vec(&[1, features.len(), 1], features)?;
        let (probs, _) = model_forward(&self.config, &self.params, &batch, ForwardMode::Eval)?;
        let row = probs.row(0).to_vec();
        Ok((decode_class(&row)?, row))
    }
}

/// Convenience wrapper over [`StreamClassifier::classify_window`].
pub fn classify_window(checkpoint: &Checkpoint, raw_window: &[f64]) -> Result<(LabelClass, Vec<f64>)> {
    StreamClassifier::from_checkpoint(checkpoint)?.classify_window(raw_window)
}

/// One line of the session log. Field order matches the wire format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRecord {
    /// Count of accepted samples at inference time.
    pub i: usize,
    /// Raw per-window argmax class.
    pub class: String,
    pub probs: Vec<f64>,
    /// Set only when the smoothed class changed at this inference.
    pub command: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StreamSummary {
    pub samples: usize,
    pub inferences: usize,
    pub malformed_lines: usize,
    pub commands_emitted: usize,
}

/// Majority vote; ties break toward the lowest canonical class index.
fn majority(votes: &VecDeque<LabelClass>) -> LabelClass {
    let mut counts = [0usize; CLASS_COUNT];
    for &v in votes {
        counts[v.index()] += 1;
    }
    let mut best = 0;
    for k in 1..CLASS_COUNT {
        if counts[k] > counts[best] {
            best = k;
        }
    }
    LabelClass::from_index(best).expect("index in range")
}

/// Consume a stream of one-number-per-line samples, writing one JSON record
/// per inference to `sink`. Malformed lines are skipped and counted.
pub fn run_stream<R: BufRead, W: Write>(
    input: R,
    classifier: &StreamClassifier,
    cfg: &StreamConfig,
    mut sink: W,
) -> Result<StreamSummary> {
    cfg.validate()?;
    let mut buffer: VecDeque<f64> = VecDeque::with_capacity(SESSION_LEN);
    let mut votes: VecDeque<LabelClass> = VecDeque::with_capacity(cfg.smoothing_votes);
    let mut smoothed: Option<LabelClass> = None;
    let mut summary = StreamSummary {
        samples: 0,
        inferences: 0,
        malformed_lines: 0,
        commands_emitted: 0,
    };

    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: f64 = match trimmed.parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            _ => {
                summary.malformed_lines += 1;
                continue;
            }
        };
        if buffer.len() == SESSION_LEN {
            buffer.pop_front();
        }
        buffer.push_back(value);
        summary.samples += 1;

        let filled = buffer.len() == SESSION_LEN;
        let due = filled && (summary.samples - SESSION_LEN) % cfg.stride == 0;
        if !due {
            continue;
        }
        let window: Vec<f64> = buffer.iter().copied().collect();
        let (class, probs) = classifier.classify_window(&window)?;
        summary.inferences += 1;

        if votes.len() == cfg.smoothing_votes {
            votes.pop_front();
        }
        votes.push_back(class);
        let now = majority(&votes);
        let command = if smoothed != Some(now) {
            smoothed = Some(now);
            summary.commands_emitted += 1;
            Some(cfg.command_map.get(now).to_string())
        } else {
            None
        };

        let record = StreamRecord {
            i: summary.samples,
            class: class.as_str().to_string(),
            probs,
            command,
        };
        serde_json::to_writer(&mut sink, &record)?;
        sink.write_all(b"\n")?;
    }
    Ok(summary)
}

/// Expected number of inferences for an N-sample stream.
pub fn expected_inferences(samples: usize, stride: usize) -> usize {
    if samples < SESSION_LEN {
        0
    } else {
        (samples - SESSION_LEN) / stride + 1
    }
}
