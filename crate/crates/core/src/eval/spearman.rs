//! Spearman rank correlation with mid-rank tie handling.

use crate::error::{Error, Result};

/// Mid-ranks (1-based, ties share the average of their positions).
fn midranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the mid-rank
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of the mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("spearman needs at least 2 samples".into()));
    }
    if !x.iter().chain(y.iter()).all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("spearman needs finite values".into()));
    }
    let constant = |s: &[f64]| s.iter().all(|&v| v == s[0]);
    if constant(x) || constant(y) {
        return Err(Error::DegenerateInput("constant series has no rank ordering".into()));
    }
    let rx = midranks(x);
    let ry = midranks(y);
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(ry.iter()) {
        let da = a - mean;
        let db = b - mean;
        cov += da * db;
        var_x += da * da;
        var_y += db * db;
    }
    Ok(cov / (var_x * var_y).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_ranks_give_one() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
    }

    #[test]
    fn reversed_ranks_give_minus_one() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn hand_computed_rank_pearson() {
        // ranks x = 1,2,3,4 and y = 2,1,4,3: covariance 3, variances 5 -> 0.6
        let rho = spearman(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert!((rho - 0.6).abs() < 1e-15);
    }

    #[test]
    fn ties_use_midranks() {
        // x has a tie at rank (1+2)/2 = 1.5
        let rho = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        // ranks x = [1.5, 1.5, 3], y = [1, 2, 3]; hand Pearson:
        let expected = {
            let rx = [1.5, 1.5, 3.0];
            let ry = [1.0, 2.0, 3.0];
            let mx = 2.0;
            let my = 2.0;
            let cov: f64 = rx.iter().zip(ry).map(|(a, b)| (a - mx) * (b - my)).sum();
            let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
            let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
            cov / (vx * vy).sqrt()
        };
        assert!((rho - expected).abs() < 1e-15);
    }

    #[test]
    fn invariant_under_strictly_increasing_transforms() {
        let x = [0.3, 1.7, 0.9, 2.4, 1.1, 0.05];
        let y = [5.0, 2.0, 7.0, 1.0, 9.0, 4.0];
        let base = spearman(&x, &y).unwrap();
        let cubed: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        assert!((spearman(&cubed, &y).unwrap() - base).abs() < 1e-12);
        let exp_y: Vec<f64> = y.iter().map(|v| v.exp()).collect();
        assert!((spearman(&x, &exp_y).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_mismatched_inputs_error() {
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateInput(_))
        ));
        assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
        assert!(spearman(&[1.0], &[1.0]).is_err());
    }
}
