//! Train-and-evaluate comparison across model kinds, quiet vs noisy.

use crate::error::Result;
use crate::eval::metrics::classification_metrics_with_scores;
use crate::network::{ModelConfig, ModelKind};
use crate::preprocess::{preprocess_session, PreprocessConfig};
use crate::rng::derive_seed;
use crate::signal::{split_dataset, Dataset, LabelClass, RawSession};
use crate::training::{predict_probs, train_model, TrainConfig, DEFAULT_LEARNING_RATE};
use rayon::prelude::*;
use serde::Serialize;

/// Epochs used by the stock benchmark. Tuned so the stacked kinds converge
/// on the synthetic training split at the fixed 1e-4 rate while the full
/// comparison still finishes in minutes.
pub const DEFAULT_BENCHMARK_EPOCHS: usize = 80;

/// Sessions per class in the stock benchmark datasets (800 sessions total).
pub const BENCHMARK_SESSIONS_PER_CLASS: usize = 200;

/// The three fixed seeds the stock benchmark averages over.
pub const BENCHMARK_SEEDS: [u64; 3] = [1, 2, 3];

// dataset substream under the run seed
const STREAM_DATASET: u64 = 7777;

/// The stock benchmark dataset for one condition and run seed: 200 sessions
/// per class from the default generator spec.
pub fn benchmark_sessions(noisy: bool, seed: u64) -> Result<Vec<crate::signal::RawSession>> {
    crate::synth::generate_dataset(
        &crate::synth::GenSpec::new(BENCHMARK_SESSIONS_PER_CLASS),
        noisy,
        derive_seed(seed, STREAM_DATASET),
    )
}

/// How a comparison run trains and scores each model kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkProtocol {
    pub train_fraction: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub preprocess: PreprocessConfig,
}

impl Default for BenchmarkProtocol {
    fn default() -> Self {
        BenchmarkProtocol {
            train_fraction: 0.8,
            epochs: DEFAULT_BENCHMARK_EPOCHS,
            batch_size: 64,
            learning_rate: DEFAULT_LEARNING_RATE,
            preprocess: PreprocessConfig::default(),
        }
    }
}

/// Test-set metrics of one trained model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
}

/// Everything one benchmark run produces.
#[derive(Debug, Clone)]
pub struct BenchmarkOutcome {
    pub metrics: RunMetrics,
    pub checkpoint: crate::training::Checkpoint,
}

/// One row of the comparison table (mean over seeds).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub method: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComparison {
    pub quiet: Vec<CompareRow>,
    pub noisy: Vec<CompareRow>,
}

// substreams under the run seed
const STREAM_TEST_SPLIT: u64 = 10;
const STREAM_VALID_SPLIT: u64 = 11;
const STREAM_TRAIN: u64 = 12;

/// Preprocess, split, train, and score one model kind under one seed.
///
/// The sessions are split `train_fraction` / rest into train+valid and test;
/// a fifth of the training part is held out as the validation set used for
/// best-checkpoint selection, so the test set never influences selection.
/// The validation slice is kept large enough that its accuracy does not
/// saturate at 1.0 a few epochs in, which would freeze best-checkpoint
/// selection on an undertrained model.
pub fn benchmark_run(
    kind: ModelKind,
    sessions: &[RawSession],
    protocol: &BenchmarkProtocol,
    seed: u64,
) -> Result<BenchmarkOutcome> {
    let windows = sessions
        .iter()
        .map(|s| preprocess_session(s, &protocol.preprocess))
        .collect::<Result<Vec<_>>>()?;
    let data = Dataset::new(windows);
    let (trainval, test) = split_dataset(&data, protocol.train_fraction, derive_seed(seed, STREAM_TEST_SPLIT))?;
    let (train, valid) = split_dataset(&trainval, 0.8, derive_seed(seed, STREAM_VALID_SPLIT))?;

    let config = ModelConfig::new(kind);
    let mut tcfg = TrainConfig::new(protocol.epochs, derive_seed(seed, STREAM_TRAIN));
    tcfg.batch_size = protocol.batch_size;
    tcfg.learning_rate = Some(protocol.learning_rate);
    let outcome = train_model(&config, &tcfg, &train, &valid, &protocol.preprocess)?;

    let params = outcome.checkpoint.to_params()?;
    let probs = predict_probs(&config, &params, &test)?;
    let labels: Vec<LabelClass> = test.windows.iter().map(|w| w.label()).collect();
    let report = classification_metrics_with_scores(&probs, &labels)?;
    Ok(BenchmarkOutcome {
        metrics: RunMetrics {
            accuracy: report.accuracy,
            precision: report.weighted_precision,
            recall: report.weighted_recall,
            f1: report.weighted_f1,
            auc: report.micro_auc.unwrap_or(f64::NAN),
        },
        checkpoint: outcome.checkpoint,
    })
}

fn mean_rows(kind: ModelKind, runs: &[RunMetrics]) -> CompareRow {
    let n = runs.len() as f64;
    CompareRow {
        method: kind.display_name().to_string(),
        accuracy: runs.iter().map(|r| r.accuracy).sum::<f64>() / n,
        precision: runs.iter().map(|r| r.precision).sum::<f64>() / n,
        recall: runs.iter().map(|r| r.recall).sum::<f64>() / n,
        f1: runs.iter().map(|r| r.f1).sum::<f64>() / n,
        auc: runs.iter().map(|r| r.auc).sum::<f64>() / n,
    }
}

/// Train and evaluate every kind under both conditions, averaging metrics
/// over the given seeds. Runs are independent and execute in parallel; the
/// output order follows the input kind list.
pub fn compare_models(
    kinds: &[ModelKind],
    quiet: &[RawSession],
    noisy: &[RawSession],
    protocol: &BenchmarkProtocol,
    seeds: &[u64],
) -> Result<ModelComparison> {
    let mut jobs = Vec::new();
    for (c, _sessions) in [quiet, noisy].iter().enumerate() {
        for &kind in kinds {
            for &seed in seeds {
                jobs.push((c, kind, seed));
            }
        }
    }
    let results: Vec<Result<RunMetrics>> = jobs
        .par_iter()
        .map(|&(c, kind, seed)| {
            let sessions = if c == 0 { quiet } else { noisy };
            benchmark_run(kind, sessions, protocol, seed).map(|out| out.metrics)
        })
        .collect();

    let mut tables = vec![Vec::new(), Vec::new()];
    let mut idx = 0;
    for c in 0..2 {
        for &kind in kinds {
            let mut runs = Vec::with_capacity(seeds.len());
            for _ in seeds {
                runs.push(results[idx].as_ref().map_err(clone_err)?.to_owned());
                idx += 1;
            }
            tables[c].push(mean_rows(kind, &runs));
        }
    }
    let noisy_rows = tables.pop().expect("two tables");
    let quiet_rows = tables.pop().expect("two tables");
    Ok(ModelComparison {
        quiet: quiet_rows,
        noisy: noisy_rows,
    })
}

fn clone_err(e: &crate::error::Error) -> crate::error::Error {
    crate::error::Error::Data(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_dataset, GenSpec};

    #[test]
    fn single_kind_single_seed_yields_one_row_per_condition() {
        let spec = GenSpec::new(8);
        let quiet = generate_dataset(&spec, false, 1).unwrap();
        let noisy = generate_dataset(&spec, true, 2).unwrap();
        let mut protocol = BenchmarkProtocol::default();
        protocol.epochs = 1;
        let cmp = compare_models(&[ModelKind::Mlp], &quiet, &noisy, &protocol, &[7]).unwrap();
        assert_eq!(cmp.quiet.len(), 1);
        assert_eq!(cmp.noisy.len(), 1);
        assert_eq!(cmp.quiet[0].method, "MLP");
        assert!(cmp.quiet[0].accuracy >= 0.0 && cmp.quiet[0].accuracy <= 1.0);
    }

    #[test]
    fn comparison_is_deterministic() {
        let spec = GenSpec::new(6);
        let quiet = generate_dataset(&spec, false, 3).unwrap();
        let noisy = generate_dataset(&spec, true, 4).unwrap();
        let mut protocol = BenchmarkProtocol::default();
        protocol.epochs = 1;
        let kinds = [ModelKind::Mlp, ModelKind::PlainLstm];
        let a = compare_models(&kinds, &quiet, &noisy, &protocol, &[1, 2]).unwrap();
        let b = compare_models(&kinds, &quiet, &noisy, &protocol, &[1, 2]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.quiet[1].method, "LSTM");
    }
}
