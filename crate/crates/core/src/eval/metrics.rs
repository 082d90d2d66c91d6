//! Confusion-derived classification metrics.

use crate::error::{Error, Result};
use crate::signal::{decode_class, LabelClass, CLASS_COUNT};
use crate::tensor::Tensor;
use serde::Serialize;

/// One-vs-rest counts for a single positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn confusion_counts(
    predictions: &[LabelClass],
    labels: &[LabelClass],
    positive: LabelClass,
) -> Result<ConfusionCounts> {
    if predictions.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation set".into()));
    }
    let mut c = ConfusionCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p == positive, l == positive) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassMetrics {
    pub class: LabelClass,
    /// Number of evaluation windows whose label is this class.
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tpr: f64,
    pub fpr: f64,
    /// True when precision had a zero denominator (no positive predictions)
    /// and was reported as 0.
    pub precision_degenerate: bool,
    /// One-vs-rest AUC; present only when scores were available.
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Support-weighted aggregates; these are the headline values.
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    /// Micro-average one-vs-rest AUC; present only when scores were available.
    pub micro_auc: Option<f64>,
}

/// Metrics from hard predictions alone (no AUC columns).
pub fn classification_metrics(
    predictions: &[LabelClass],
    labels: &[LabelClass],
) -> Result<MetricsReport> {
    if predictions.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation set".into()));
    }
    let n = labels.len();
    let correct = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    let accuracy = correct as f64 / n as f64;

    let mut per_class = Vec::with_capacity(CLASS_COUNT);
    for class in LabelClass::ALL {
        let c = confusion_counts(predictions, labels, class)?;
        let support = c.tp + c.fn_;
        let predicted_positive = c.tp + c.fp;
        let precision_degenerate = predicted_positive == 0;
        let precision = if precision_degenerate {
            0.0
        } else {
            c.tp as f64 / predicted_positive as f64
        };
        let recall = if support == 0 { 0.0 } else { c.tp as f64 / support as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let negatives = c.fp + c.tn;
        let fpr = if negatives == 0 { 0.0 } else { c.fp as f64 / negatives as f64 };
        per_class.push(ClassMetrics {
            class,
            support,
            precision,
            recall,
            f1,
            tpr: recall,
            fpr,
            precision_degenerate,
            auc: None,
        });
    }

    let k = per_class.len() as f64;
    let macro_precision = per_class.iter().map(|m| m.precision).sum::<f64>() / k;
    let macro_recall = per_class.iter().map(|m| m.recall).sum::<f64>() / k;
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / k;
    let weighted = |f: fn(&ClassMetrics) -> f64| {
        per_class.iter().map(|m| f(m) * m.support as f64).sum::<f64>() / n as f64
    };
    Ok(MetricsReport {
        accuracy,
        macro_precision,
        macro_recall,
        macro_f1,
        weighted_precision: weighted(|m| m.precision),
        weighted_recall: weighted(|m| m.recall),
        weighted_f1: weighted(|m| m.f1),
        per_class,
        micro_auc: None,
    })
}

/// Metrics from probability rows: argmax predictions plus per-class and
/// micro-average one-vs-rest AUCs.
pub fn classification_metrics_with_scores(
    probs: &Tensor,
    labels: &[LabelClass],
) -> Result<MetricsReport> {
    if probs.ndim() != 2 || probs.cols() != CLASS_COUNT || probs.rows() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "probabilities {:?} vs {} labels",
            probs.shape(),
            labels.len()
        )));
    }
    let predictions: Vec<LabelClass> = (0..probs.rows())
        .map(|r| decode_class(probs.row(r)))
        .collect::<Result<_>>()?;
    let mut report = classification_metrics(&predictions, labels)?;

    // one-vs-rest AUC per class plus a micro-average over all pooled pairs
    let mut micro_scores = Vec::with_capacity(probs.rows() * CLASS_COUNT);
    let mut micro_truth = Vec::with_capacity(probs.rows() * CLASS_COUNT);
    for class in LabelClass::ALL {
        let scores: Vec<f64> = (0..probs.rows()).map(|r| probs.at(r, class.index())).collect();
        let auc = match crate::eval::roc::roc_curve(&scores, labels, class) {
            Ok(curve) => Some(crate::eval::roc::auc(&curve)),
            Err(Error::DegenerateInput(_)) => None,
            Err(e) => return Err(e),
        };
        report.per_class[class.index()].auc = auc;
        for (r, &label) in labels.iter().enumerate() {
            micro_scores.push(probs.at(r, class.index()));
            micro_truth.push(label == class);
        }
    }
    report.micro_auc = binary_auc(&micro_scores, &micro_truth);
    Ok(report)
}

/// Trapezoidal AUC over pooled binary pairs; `None` when one class is absent.
fn binary_auc(scores: &[f64], truth: &[bool]) -> Option<f64> {
    let labels: Vec<LabelClass> = truth
        .iter()
        .map(|&t| if t { LabelClass::Relaxed } else { LabelClass::Focused })
        .collect();
    match crate::eval::roc::roc_curve(scores, &labels, LabelClass::Relaxed) {
        Ok(curve) => Some(crate::eval::roc::auc(&curve)),
        Err(_) => None,
    }
}
