//! ROC curves and the area under them.

use crate::error::{Error, Result};
use crate::signal::LabelClass;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Ordered from (0,0) at threshold +inf down to (1,1) at the lowest score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

/// Sweep thresholds over the sorted distinct scores, grouping ties.
pub fn roc_curve(scores: &[f64], labels: &[LabelClass], positive: LabelClass) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if !scores.iter().all(|s| s.is_finite()) {
        return Err(Error::InvalidArgument("scores must be finite".into()));
    }
    let positives = labels.iter().filter(|&&l| l == positive).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateInput(
            "ROC needs at least one positive and one negative example".into(),
        ));
    }

    let mut pairs: Vec<(f64, bool)> = scores
        .iter()
        .zip(labels)
        .map(|(&s, &l)| (s, l == positive))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite scores"));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut idx = 0;
    while idx < pairs.len() {
        let threshold = pairs[idx].0;
        // consume the whole tie group at this score
        while idx < pairs.len() && pairs[idx].0 == threshold {
            if pairs[idx].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
        });
    }
    Ok(RocCurve { points })
}

/// Trapezoidal area under the curve.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|pair| {
            let (a, b) = (pair[0], pair[1]);
            (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use LabelClass::{Focused, Relaxed};

    const POS: LabelClass = Relaxed;
    const NEG: LabelClass = Focused;

    /// Mann-Whitney pair counting: fraction of (positive, negative) pairs
    /// ranked correctly, ties counted 1/2. Independent oracle for `auc`.
    fn pair_counting_auc(scores: &[f64], labels: &[LabelClass], positive: LabelClass) -> f64 {
        let pos: Vec<f64> = scores
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == positive)
            .map(|(&s, _)| s)
            .collect();
        let neg: Vec<f64> = scores
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l != positive)
            .map(|(&s, _)| s)
            .collect();
        let mut total = 0.0;
        for &p in &pos {
            for &n in &neg {
                total += if p > n {
                    1.0
                } else if p == n {
                    0.5
                } else {
                    0.0
                };
            }
        }
        total / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn four_point_example_from_hand_enumeration() {
        let scores = [0.9, 0.8, 0.7, 0.6];
        let labels = [POS, NEG, POS, NEG];
        let curve = roc_curve(&scores, &labels, POS).unwrap();
        let expected = [
            (0.0, 0.0),
            (0.0, 0.5),
            (0.5, 0.5),
            (0.5, 1.0),
            (1.0, 1.0),
        ];
        assert_eq!(curve.points.len(), expected.len());
        for (p, (fpr, tpr)) in curve.points.iter().zip(expected) {
            assert_eq!((p.fpr, p.tpr), (fpr, tpr));
        }
        // 3 of 4 (positive, negative) pairs are correctly ordered, no ties
        assert!((auc(&curve) - 0.75).abs() < 1e-15);
        assert_eq!(pair_counting_auc(&scores, &labels, POS), 0.75);
    }

    #[test]
    fn perfect_separation() {
        let scores = [0.9, 0.8, 0.2, 0.1];
        let labels = [POS, POS, NEG, NEG];
        let curve = roc_curve(&scores, &labels, POS).unwrap();
        assert!(curve.points.iter().any(|p| p.fpr == 0.0 && p.tpr == 1.0));
        assert_eq!(auc(&curve), 1.0);
    }

    #[test]
    fn identical_scores_collapse_to_the_diagonal() {
        let scores = [0.4, 0.4, 0.4, 0.4];
        let labels = [POS, NEG, POS, NEG];
        let curve = roc_curve(&scores, &labels, POS).unwrap();
        assert_eq!(curve.points.len(), 2);
        assert_eq!((curve.points[0].fpr, curve.points[0].tpr), (0.0, 0.0));
        assert_eq!((curve.points[1].fpr, curve.points[1].tpr), (1.0, 1.0));
        assert_eq!(auc(&curve), 0.5);
        assert_eq!(pair_counting_auc(&scores, &labels, POS), 0.5);
    }

    #[test]
    fn single_class_labels_are_degenerate() {
        let scores = [0.1, 0.2];
        assert!(matches!(
            roc_curve(&scores, &[POS, POS], POS),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn trapezoid_matches_pair_counting_on_seeded_fixtures() {
        use crate::rng::new_rng;
        use rand::Rng;
        for seed in 0..100u64 {
            let mut rng = new_rng(seed);
            let n = 5 + (seed as usize % 40);
            // coarse grid of scores so ties are common
            let scores: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() * 8.0).round() / 8.0).collect();
            let labels: Vec<LabelClass> = (0..n)
                .map(|i| {
                    if i < 2 {
                        [POS, NEG][i] // at least one of each
                    } else if rng.random::<f64>() < 0.5 {
                        POS
                    } else {
                        NEG
                    }
                })
                .collect();
            let curve = roc_curve(&scores, &labels, POS).unwrap();
            let trapezoid = auc(&curve);
            let pairs = pair_counting_auc(&scores, &labels, POS);
            assert!(
                (trapezoid - pairs).abs() < 1e-12,
                "seed {}: {} vs {}",
                seed,
                trapezoid,
                pairs
            );
        }
    }

    #[test]
    fn curves_start_at_origin_end_at_one_and_never_decrease() {
        use crate::rng::new_rng;
        use rand::Rng;
        for seed in 100..200u64 {
            let mut rng = new_rng(seed);
            let n = 4 + (seed as usize % 30);
            let scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let labels: Vec<LabelClass> = (0..n)
                .map(|i| if i % 2 == 0 { POS } else { NEG })
                .collect();
            let curve = roc_curve(&scores, &labels, POS).unwrap();
            let first = curve.points.first().unwrap();
            let last = curve.points.last().unwrap();
            assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
            assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
            for pair in curve.points.windows(2) {
                assert!(pair[1].fpr >= pair[0].fpr);
                assert!(pair[1].tpr >= pair[0].tpr);
                assert!(pair[1].threshold < pair[0].threshold);
            }
        }
    }
}
