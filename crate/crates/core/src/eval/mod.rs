//! Evaluation suite: confusion metrics, ROC/AUC, Spearman similarity, and
//! the cross-model comparison harness.

pub mod compare;
pub mod metrics;
pub mod roc;
pub mod similarity;
pub mod spearman;

pub use compare::{
    benchmark_run, benchmark_sessions, compare_models, BenchmarkOutcome, BenchmarkProtocol, CompareRow,
    ModelComparison, RunMetrics, BENCHMARK_SEEDS, BENCHMARK_SESSIONS_PER_CLASS,
    DEFAULT_BENCHMARK_EPOCHS,
};
pub use metrics::{
    classification_metrics, classification_metrics_with_scores, confusion_counts, ClassMetrics,
    ConfusionCounts, MetricsReport,
};
pub use roc::{auc, roc_curve, RocCurve, RocPoint};
pub use similarity::{similarity_matrix, SimilarityMatrix};
pub use spearman::spearman;
