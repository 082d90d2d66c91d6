//! Within-class (Self) and between-class (Cross) Spearman similarity of raw
//! sessions, laid out as a 4x4 matrix plus Self and Cross columns.

use crate::error::{Error, Result};
use crate::eval::spearman::spearman;
use crate::rng::new_rng;
use crate::signal::{LabelClass, RawSession, CLASS_COUNT};
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityMatrix {
    /// Mean Spearman coefficient for each class pair; symmetric.
    pub matrix: [[f64; CLASS_COUNT]; CLASS_COUNT],
    /// Diagonal entries (within-class similarity).
    pub self_values: [f64; CLASS_COUNT],
    /// Row means over the off-diagonal entries.
    pub cross_values: [f64; CLASS_COUNT],
}

/// Average Spearman over seed-deterministic sampled session pairs for each
/// unordered class pair. The diagonal samples distinct sessions. Pairs whose
/// correlation is undefined (a constant series) are skipped.
pub fn similarity_matrix(
    sessions: &[RawSession],
    samples_per_pair: usize,
    seed: u64,
) -> Result<SimilarityMatrix> {
    if samples_per_pair == 0 {
        return Err(Error::InvalidArgument("samples_per_pair must be >= 1".into()));
    }
    let mut by_class: Vec<Vec<&RawSession>> = vec![Vec::new(); CLASS_COUNT];
    for s in sessions {
        by_class[s.label.index()].push(s);
    }
    for class in LabelClass::ALL {
        if by_class[class.index()].len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "class {} needs at least 2 sessions, has {}",
                class.as_str(),
                by_class[class.index()].len()
            )));
        }
    }

    let mut rng = new_rng(seed);
    let mut matrix = [[0.0; CLASS_COUNT]; CLASS_COUNT];
    for a in 0..CLASS_COUNT {
        for b in a..CLASS_COUNT {
            let group_a = &by_class[a];
            let group_b = &by_class[b];
            let mut sum = 0.0;
            let mut used = 0usize;
            for _ in 0..samples_per_pair {
                let i = rng.random_range(0..group_a.len());
                let j = if a == b {
                    // distinct sessions on the diagonal
                    let j = rng.random_range(0..group_b.len() - 1);
                    if j >= i {
                        j + 1
                    } else {
                        j
                    }
                } else {
                    rng.random_range(0..group_b.len())
                };
                match spearman(&group_a[i].values, &group_b[j].values) {
                    Ok(rho) => {
                        sum += rho;
                        used += 1;
                    }
                    Err(Error::DegenerateInput(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            if used == 0 {
                return Err(Error::DegenerateInput(format!(
                    "all sampled pairs for ({}, {}) were constant series",
                    LabelClass::ALL[a].as_str(),
                    LabelClass::ALL[b].as_str()
                )));
            }
            let mean = sum / used as f64;
            matrix[a][b] = mean;
            matrix[b][a] = mean;
        }
    }

    let mut self_values = [0.0; CLASS_COUNT];
    let mut cross_values = [0.0; CLASS_COUNT];
    for r in 0..CLASS_COUNT {
        self_values[r] = matrix[r][r];
        let off: f64 = (0..CLASS_COUNT).filter(|&c| c != r).map(|c| matrix[r][c]).sum();
        cross_values[r] = off / (CLASS_COUNT - 1) as f64;
    }
    Ok(SimilarityMatrix {
        matrix,
        self_values,
        cross_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{Gender, SESSION_LEN};

    fn ramp_session(label: LabelClass, slope: f64, bump: f64) -> RawSession {
        let values: Vec<f64> = (0..SESSION_LEN)
            .map(|i| 40.0 + slope * i as f64 + if i == 7 { bump } else { 0.0 })
            .collect();
        RawSession::new("s", Gender::Male, label, false, values).unwrap()
    }

    #[test]
    fn identical_ramps_give_self_one() {
        // every class holds identical monotone ramps (up to a tiny bump that
        // keeps sessions distinct objects but identical in rank order)
        let mut sessions = Vec::new();
        for label in LabelClass::ALL {
            sessions.push(ramp_session(label, 0.1, 0.0));
            sessions.push(ramp_session(label, 0.1, 0.0));
        }
        let sim = similarity_matrix(&sessions, 8, 1).unwrap();
        for v in sim.self_values {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_is_exactly_symmetric() {
        let mut sessions = Vec::new();
        for (k, label) in LabelClass::ALL.into_iter().enumerate() {
            for j in 0..3 {
                let slope = if k % 2 == 0 { 0.05 } else { -0.05 };
                sessions.push(ramp_session(label, slope + 0.01 * j as f64, j as f64));
            }
        }
        let sim = similarity_matrix(&sessions, 5, 42).unwrap();
        for a in 0..CLASS_COUNT {
            for b in 0..CLASS_COUNT {
                assert_eq!(sim.matrix[a][b], sim.matrix[b][a]);
            }
        }
        // deterministic under the same seed
        assert_eq!(sim, similarity_matrix(&sessions, 5, 42).unwrap());
    }

    #[test]
    fn too_few_sessions_in_a_class_is_an_error() {
        let sessions = vec![
            ramp_session(LabelClass::Relaxed, 0.1, 0.0),
            ramp_session(LabelClass::Relaxed, 0.2, 0.0),
            ramp_session(LabelClass::Focused, 0.1, 0.0),
        ];
        assert!(similarity_matrix(&sessions, 4, 1).is_err());
    }
}
