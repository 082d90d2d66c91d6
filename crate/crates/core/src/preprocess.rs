//! Session preprocessing: outlier repair, feature separation, down-sampling,
//! and min-max normalization.
//!
//! The pipeline order is fixed: repair outliers first so later stages see
//! clean data, separate features, down-sample, normalize last so the network
//! input range is exact.

use crate::error::{Error, Result};
use crate::signal::{ProcessedWindow, RawSession, SessionMeta};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    /// Z-score threshold for outlier detection.
    pub outlier_z_threshold: f64,
    /// Sample count of the trailing window whose median forms the B component
    /// of the separation step. 180 means the whole session.
    pub baseline_window: usize,
    /// Block size for mean down-sampling; must divide the session length.
    pub downsample_factor: usize,
    /// Ranges at or below this are treated as flat in normalization.
    pub normalization_epsilon: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            outlier_z_threshold: 3.0,
            baseline_window: 180,
            downsample_factor: 6,
            normalization_epsilon: 1e-9,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self, session_len: usize) -> Result<()> {
        if self.outlier_z_threshold <= 0.0 {
            return Err(Error::InvalidArgument(
                "outlier z threshold must be positive".into(),
            ));
        }
        if self.downsample_factor == 0 || session_len % self.downsample_factor != 0 {
            return Err(Error::InvalidArgument(format!(
                "downsample factor {} must divide the session length {}",
                self.downsample_factor, session_len
            )));
        }
        if self.baseline_window == 0 {
            return Err(Error::InvalidArgument("baseline window must be >= 1".into()));
        }
        Ok(())
    }
}

/// Indices where `|x_i - mean| > z * stddev` (population stddev).
/// Returns the empty set when the series has zero deviation.
pub fn detect_outliers(series: &[f64], z_threshold: f64) -> Result<BTreeSet<usize>> {
    if series.len() < 3 {
        return Err(Error::InvalidArgument(
            "outlier detection needs at least 3 samples".into(),
        ));
    }
    if !series.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("series contains non-finite values".into()));
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    let mut out = BTreeSet::new();
    if std == 0.0 {
        return Ok(out);
    }
    for (i, &v) in series.iter().enumerate() {
        if (v - mean).abs() > z_threshold * std {
            out.insert(i);
        }
    }
    Ok(out)
}

/// Replace flagged samples with the mean of their original neighbors.
/// Flagged endpoints copy their single neighbor's original value.
pub fn replace_outliers(series: &[f64], outliers: &BTreeSet<usize>) -> Vec<f64> {
    let n = series.len();
    let mut out = series.to_vec();
    for &i in outliers {
        assert!(i < n, "outlier index out of range");
        out[i] = if i == 0 {
            series[1]
        } else if i == n - 1 {
            series[n - 2]
        } else {
            (series[i - 1] + series[i + 1]) / 2.0
        };
    }
    out
}

fn median_of(sorted: &mut Vec<f64>) -> f64 {
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Separate mixed features: `Y_i = 2 * x_i - B_i` where `B_i` is the median
/// of the trailing `baseline_window` samples ending at `i` (truncated at the
/// start of the series). The map is asymmetric in its two roles,
/// `F(u, v) = 2u - v != F(v, u)` whenever `u != v`.
pub fn separate_features(series: &[f64], config: &PreprocessConfig) -> Vec<f64> {
    assert!(!series.is_empty(), "separate_features needs a non-empty series");
    let w = config.baseline_window;
    let mut out = Vec::with_capacity(series.len());
    let mut window = Vec::new();
    for i in 0..series.len() {
        let lo = (i + 1).saturating_sub(w);
        window.clear();
        window.extend_from_slice(&series[lo..=i]);
        let b = median_of(&mut window);
        out.push(2.0 * series[i] - b);
    }
    out
}

/// Non-overlapping block means; `factor` must divide the length.
pub fn downsample(series: &[f64], factor: usize) -> Result<Vec<f64>> {
    if factor == 0 || series.len() % factor != 0 {
        return Err(Error::InvalidArgument(format!(
            "downsample factor {} does not divide length {}",
            factor,
            series.len()
        )));
    }
    Ok(series
        .chunks(factor)
        .map(|block| block.iter().sum::<f64>() / factor as f64)
        .collect())
}

/// Linear map onto [0, 1]; a series whose range is at most `epsilon` maps to
/// the constant 0.5.
pub fn minmax_normalize(series: &[f64], epsilon: f64) -> Vec<f64> {
    assert!(!series.is_empty(), "minmax_normalize needs a non-empty series");
    let min = series.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range <= epsilon {
        return vec![0.5; series.len()];
    }
    series.iter().map(|v| (v - min) / range).collect()
}

/// Full pipeline from a raw session to a network-ready window.
pub fn preprocess_session(session: &RawSession, config: &PreprocessConfig) -> Result<ProcessedWindow> {
    session.validate()?;
    config.validate(session.values.len())?;
    let features = preprocess_values(&session.values, config)?;
    ProcessedWindow::new(
        features,
        session.label,
        SessionMeta {
            subject_id: session.subject_id.clone(),
            gender: session.gender,
            noisy: session.noisy,
        },
    )
}

/// Label-free variant of the pipeline, used by streaming inference where no
/// ground-truth label exists.
pub fn preprocess_values(values: &[f64], config: &PreprocessConfig) -> Result<Vec<f64>> {
    config.validate(values.len())?;
    let outliers = detect_outliers(values, config.outlier_z_threshold)?;
    let repaired = replace_outliers(values, &outliers);
    let separated = separate_features(&repaired, config);
    let down = downsample(&separated, config.downsample_factor)?;
    Ok(minmax_normalize(&down, config.normalization_epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{Gender, LabelClass, RawSession, SESSION_LEN, WINDOW_LEN};

    fn set(indices: &[usize]) -> BTreeSet<usize> {
        indices.iter().copied().collect()
    }

    #[test]
    fn detect_outliers_zero_deviation() {
        assert!(detect_outliers(&[50.0, 50.0, 50.0, 50.0], 3.0).unwrap().is_empty());
    }

    #[test]
    fn detect_outliers_hand_oracle() {
        // mean = 10, population stddev = 30; |100 - 10| = 90 > 2 * 30
        let series = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 100.0];
        let mean = series.iter().sum::<f64>() / 10.0;
        let std = (series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 10.0).sqrt();
        assert_eq!(mean, 10.0);
        assert_eq!(std, 30.0);
        assert_eq!(detect_outliers(&series, 2.0).unwrap(), set(&[9]));
    }

    #[test]
    fn detect_outliers_small_clean_series() {
        assert!(detect_outliers(&[1.0, 2.0, 3.0], 3.0).unwrap().is_empty());
        assert!(detect_outliers(&[1.0, 2.0], 3.0).is_err());
    }

    #[test]
    fn replace_outliers_cases() {
        assert_eq!(replace_outliers(&[1.0, 100.0, 3.0], &set(&[1])), vec![1.0, 2.0, 3.0]);
        assert_eq!(replace_outliers(&[100.0, 2.0, 3.0], &set(&[0])), vec![2.0, 2.0, 3.0]);
        assert_eq!(replace_outliers(&[1.0, 2.0, 3.0], &set(&[])), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn replace_uses_original_neighbors() {
        // both flagged: each replacement uses original values, not repaired ones
        let out = replace_outliers(&[10.0, 0.0, 0.0, 10.0], &set(&[1, 2]));
        assert_eq!(out, vec![10.0, 5.0, 5.0, 10.0]);
    }

    #[test]
    fn separation_examples() {
        let cfg = PreprocessConfig::default();
        let constant = vec![50.0; SESSION_LEN];
        assert_eq!(separate_features(&constant, &cfg), constant);

        let cfg3 = PreprocessConfig {
            baseline_window: 3,
            ..PreprocessConfig::default()
        };
        assert_eq!(separate_features(&[50.0, 50.0, 80.0], &cfg3), vec![50.0, 50.0, 110.0]);
    }

    #[test]
    fn separation_is_asymmetric() {
        // F(u, v) = 2u - v with the two roles swapped
        let f = |u: f64, v: f64| 2.0 * u - v;
        assert_eq!(f(60.0, 40.0), 80.0);
        assert_eq!(f(40.0, 60.0), 20.0);
        for k in 0..100 {
            let u = -50.0 + 1.37 * k as f64;
            let v = u + 0.5 + k as f64;
            assert_ne!(f(u, v), f(v, u));
        }
    }

    #[test]
    fn downsample_cases() {
        assert_eq!(downsample(&[1.0, 3.0, 5.0, 7.0], 2).unwrap(), vec![2.0, 6.0]);
        assert_eq!(downsample(&[1.0, 3.0, 5.0], 1).unwrap(), vec![1.0, 3.0, 5.0]);
        assert_eq!(downsample(&vec![7.5; SESSION_LEN], 6).unwrap(), vec![7.5; 30]);
        assert!(downsample(&[1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn minmax_cases() {
        assert_eq!(minmax_normalize(&[2.0, 4.0, 6.0], 1e-9), vec![0.0, 0.5, 1.0]);
        assert_eq!(minmax_normalize(&[5.0, 5.0, 5.0], 1e-9), vec![0.5, 0.5, 0.5]);
    }

    fn session(values: Vec<f64>, label: LabelClass) -> RawSession {
        RawSession::new("s1", Gender::Male, label, false, values).unwrap()
    }

    #[test]
    fn pipeline_constant_session() {
        let w = preprocess_session(&session(vec![50.0; SESSION_LEN], LabelClass::Relaxed), &PreprocessConfig::default())
            .unwrap();
        assert_eq!(w.features, vec![0.5; WINDOW_LEN]);
        assert_eq!(w.one_hot, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn pipeline_ramp_is_strictly_increasing() {
        let ramp: Vec<f64> = (0..SESSION_LEN).map(|i| i as f64).collect();
        let w = preprocess_session(&session(ramp, LabelClass::Focused), &PreprocessConfig::default()).unwrap();
        for pair in w.features.windows(2) {
            assert!(pair[1] > pair[0], "features not strictly increasing: {:?}", pair);
        }
        assert_eq!(w.features.len(), WINDOW_LEN);
    }

    #[test]
    fn pipeline_is_deterministic() {
        let s = session((0..SESSION_LEN).map(|i| (i as f64 * 0.7).sin() * 10.0 + 60.0).collect(), LabelClass::Focused);
        let cfg = PreprocessConfig::default();
        assert_eq!(
            preprocess_session(&s, &cfg).unwrap(),
            preprocess_session(&s, &cfg).unwrap()
        );
    }

    #[test]
    fn repair_changes_only_flagged_indices() {
        let mut values: Vec<f64> = (0..SESSION_LEN).map(|i| 55.0 + ((i * 7) % 13) as f64 * 0.3).collect();
        values[42] = 400.0;
        let flagged = detect_outliers(&values, 3.0).unwrap();
        assert!(flagged.contains(&42));
        let repaired = replace_outliers(&values, &flagged);
        for i in 0..SESSION_LEN {
            if flagged.contains(&i) {
                continue;
            }
            assert_eq!(repaired[i], values[i], "index {} changed without being flagged", i);
        }
    }
}
