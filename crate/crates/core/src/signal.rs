//! Core domain types: mental-state labels, recorded sessions, processed
//! windows, and dataset splitting.

use crate::error::{Error, Result};
use crate::rng::new_rng;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Number of raw score samples in one session.
pub const SESSION_LEN: usize = 180;
/// Number of features in one processed window.
pub const WINDOW_LEN: usize = 30;
/// Number of mental-state classes.
pub const CLASS_COUNT: usize = 4;

/// The four mental-state classes, in canonical index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelClass {
    #[serde(rename = "relaxed")]
    Relaxed,
    #[serde(rename = "relaxed_to_focused")]
    RelaxedToFocused,
    #[serde(rename = "focused_to_relaxed")]
    FocusedToRelaxed,
    #[serde(rename = "focused")]
    Focused,
}

impl LabelClass {
    pub const ALL: [LabelClass; CLASS_COUNT] = [
        LabelClass::Relaxed,
        LabelClass::RelaxedToFocused,
        LabelClass::FocusedToRelaxed,
        LabelClass::Focused,
    ];

    /// Canonical index: Relaxed=0, RelaxedToFocused=1, FocusedToRelaxed=2, Focused=3.
    pub fn index(self) -> usize {
        match self {
            LabelClass::Relaxed => 0,
            LabelClass::RelaxedToFocused => 1,
            LabelClass::FocusedToRelaxed => 2,
            LabelClass::Focused => 3,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        LabelClass::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("class index {} out of range", i)))
    }

    /// Wire name used in JSONL files and logs.
    pub fn as_str(self) -> &'static str {
        match self {
            LabelClass::Relaxed => "relaxed",
            LabelClass::RelaxedToFocused => "relaxed_to_focused",
            LabelClass::FocusedToRelaxed => "focused_to_relaxed",
            LabelClass::Focused => "focused",
        }
    }

    pub fn from_str_name(s: &str) -> Result<Self> {
        match s {
            "relaxed" => Ok(LabelClass::Relaxed),
            "relaxed_to_focused" => Ok(LabelClass::RelaxedToFocused),
            "focused_to_relaxed" => Ok(LabelClass::FocusedToRelaxed),
            "focused" => Ok(LabelClass::Focused),
            other => Err(Error::Data(format!("unknown label {:?}", other))),
        }
    }

    /// True for the two steady states (not a transition).
    pub fn is_plateau(self) -> bool {
        matches!(self, LabelClass::Relaxed | LabelClass::Focused)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    #[serde(rename = "M")]
    Male,
    #[serde(rename = "F")]
    Female,
}

/// One recorded (or generated) EEG score series with its metadata.
///
/// Field order matches the JSONL wire format exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSession {
    pub subject_id: String,
    pub gender: Gender,
    pub label: LabelClass,
    pub noisy: bool,
    pub values: Vec<f64>,
}

impl RawSession {
    pub fn new(
        subject_id: impl Into<String>,
        gender: Gender,
        label: LabelClass,
        noisy: bool,
        values: Vec<f64>,
    ) -> Result<Self> {
        let s = RawSession {
            subject_id: subject_id.into(),
            gender,
            label,
            noisy,
            values,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != SESSION_LEN {
            return Err(Error::InvalidArgument(format!(
                "session must have exactly {} values, got {}",
                SESSION_LEN,
                self.values.len()
            )));
        }
        if !self.values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "session contains non-finite values".into(),
            ));
        }
        Ok(())
    }
}

/// Provenance carried from a session into the window built from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub subject_id: String,
    pub gender: Gender,
    pub noisy: bool,
}

/// A length-30 normalized feature sequence plus its one-hot label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessedWindow {
    pub features: Vec<f64>,
    pub one_hot: Vec<f64>,
    pub source: SessionMeta,
}

impl ProcessedWindow {
    pub fn new(features: Vec<f64>, label: LabelClass, source: SessionMeta) -> Result<Self> {
        let w = ProcessedWindow {
            features,
            one_hot: encode_one_hot(label),
            source,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.len() != WINDOW_LEN {
            return Err(Error::InvalidArgument(format!(
                "window must have exactly {} features, got {}",
                WINDOW_LEN,
                self.features.len()
            )));
        }
        if !self
            .features
            .iter()
            .all(|v| v.is_finite() && (0.0..=1.0).contains(v))
        {
            return Err(Error::InvalidArgument(
                "window features must lie in [0, 1]".into(),
            ));
        }
        let ones = self.one_hot.iter().filter(|&&v| v == 1.0).count();
        let zeros = self.one_hot.iter().filter(|&&v| v == 0.0).count();
        if self.one_hot.len() != CLASS_COUNT || ones != 1 || zeros != CLASS_COUNT - 1 {
            return Err(Error::InvalidArgument("malformed one-hot label".into()));
        }
        Ok(())
    }

    pub fn label(&self) -> LabelClass {
        decode_class(&self.one_hot).expect("validated one-hot")
    }
}

/// An ordered collection of processed windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub windows: Vec<ProcessedWindow>,
    /// Generation/collection parameters, free-form.
    pub metadata: serde_json::Value,
}

impl Dataset {
    pub fn new(windows: Vec<ProcessedWindow>) -> Self {
        Dataset {
            windows,
            metadata: serde_json::Value::Null,
        }
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

/// One-hot encode a class at its canonical index.
pub fn encode_one_hot(class: LabelClass) -> Vec<f64> {
    let mut v = vec![0.0; CLASS_COUNT];
    v[class.index()] = 1.0;
    v
}

/// Argmax decode; ties break toward the lowest canonical index.
pub fn decode_class(probs: &[f64]) -> Result<LabelClass> {
    if probs.len() != CLASS_COUNT {
        return Err(Error::ShapeMismatch(format!(
            "expected {} probabilities, got {}",
            CLASS_COUNT,
            probs.len()
        )));
    }
    if !probs.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite probabilities".into()));
    }
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    LabelClass::from_index(best)
}

/// Deterministically shuffle and partition a dataset.
///
/// The train part receives `round(train_fraction * N)` windows.
pub fn split_dataset(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("cannot split an empty dataset".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must be in (0, 1), got {}",
            train_fraction
        )));
    }
    let n = data.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut new_rng(seed));
    let n_train = (train_fraction * n as f64).round() as usize;
    let take = |idx: &[usize]| Dataset {
        windows: idx.iter().map(|&i| data.windows[i].clone()).collect(),
        metadata: data.metadata.clone(),
    };
    Ok((take(&order[..n_train]), take(&order[n_train..])))
}

/// Write sessions as JSON-Lines, one object per session.
pub fn write_sessions_jsonl<W: Write>(mut w: W, sessions: &[RawSession]) -> Result<()> {
    for s in sessions {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Read sessions from JSON-Lines, validating each.
pub fn read_sessions_jsonl<R: BufRead>(r: R) -> Result<Vec<RawSession>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: RawSession = serde_json::from_str(&line)
            .map_err(|e| Error::Data(format!("line {}: {}", lineno + 1, e)))?;
        s.validate()
            .map_err(|e| Error::Data(format!("line {}: {}", lineno + 1, e)))?;
        out.push(s);
    }
    Ok(out)
}
