use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Scores {
    #[serde(rename = "macro")]
    pub macro_f1: f64,
    #[serde(rename = "micro")]
    pub micro_f1: f64,
}

/// Macro- and micro-averaged F1 of a single-label prediction.
///
/// Macro averages per-class F1 over the classes present in `y_true`; a
/// class with no true positives scores 0. Micro pools the counts, which for
/// single-label data equals accuracy.
pub fn f1_scores(y_true: &[usize], y_pred: &[usize]) -> Result<F1Scores> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Dimension(format!("{} true labels vs {} predictions", y_true.len(), y_pred.len())));
    }
    if y_true.is_empty() {
        return Err(Error::Domain("F1 of an empty prediction".into()));
    }
    // (tp, fp, fn) per class.
    let mut counts: BTreeMap<usize, (usize, usize, usize)> = BTreeMap::new();
    for &t in y_true {
        counts.entry(t).or_default();
    }
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t == p {
            counts.entry(t).or_default().0 += 1;
        } else {
            counts.entry(p).or_default().1 += 1;
            counts.entry(t).or_default().2 += 1;
        }
    }
    let f1 = |(tp, fp, fneg): (usize, usize, usize)| {
        let denom = 2 * tp + fp + fneg;
        if denom == 0 {
            0.0
        } else {
            2.0 * tp as f64 / denom as f64
        }
    };
    let present: Vec<usize> = {
        let mut v = y_true.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    let macro_f1 = present.iter().map(|c| f1(counts[c])).sum::<f64>() / present.len() as f64;
    let total = counts.values().fold((0, 0, 0), |a, c| (a.0 + c.0, a.1 + c.1, a.2 + c.2));
    Ok(F1Scores { macro_f1, micro_f1: f1(total) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect() {
        let y = [0, 1, 2, 2, 1];
        assert_eq!(f1_scores(&y, &y).unwrap(), F1Scores { macro_f1: 1.0, micro_f1: 1.0 });
    }

    #[test]
    fn worked_example() {
        // Class 0: P = 2/3, R = 1, F1 = 0.8. Class 1: P = 1, R = 1/2, F1 = 2/3.
        let s = f1_scores(&[0, 0, 1, 1], &[0, 0, 1, 0]).unwrap();
        assert!((s.macro_f1 - (0.8 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert!((s.macro_f1 - 0.7333).abs() < 1e-4);
        assert_eq!(s.micro_f1, 0.75);
    }

    #[test]
    fn relabeling_invariant() {
        let t = [0, 0, 1, 2, 2, 1, 0];
        let p = [0, 1, 1, 2, 0, 1, 2];
        let swap = |v: &[usize]| v.iter().map(|&c| [2, 0, 1][c]).collect::<Vec<_>>();
        assert_eq!(f1_scores(&t, &p).unwrap(), f1_scores(&swap(&t), &swap(&p)).unwrap());
    }

    #[test]
    fn absent_predicted_class_is_not_averaged() {
        // Class 7 only appears in predictions, so macro averages over {0, 1}.
        let s = f1_scores(&[0, 1], &[0, 7]).unwrap();
        assert_eq!(s.macro_f1, 0.5);
        assert_eq!(s.micro_f1, 0.5);
    }

    #[test]
    fn length_mismatch() {
        assert!(f1_scores(&[0], &[0, 1]).is_err());
    }
}
