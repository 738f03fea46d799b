use std::collections::HashSet;

use crate::error::{Error, Result};

/// Node ids by descending score, ties by ascending id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedList {
    order: Vec<usize>,
}

impl RankedList {
    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        if let Some(bad) = scores.iter().find(|s| s.is_nan()) {
            return Err(Error::Numeric(format!("cannot rank score {bad}")));
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Ok(Self { order })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Size of the top `l_percent`% prefix: `⌈l%·N⌉`.
    pub fn cutoff(&self, l_percent: f64) -> usize {
        let raw = (l_percent / 100.0 * self.order.len() as f64 - 1e-9).ceil();
        (raw.max(0.0) as usize).min(self.order.len())
    }

    pub fn top(&self, l_percent: f64) -> &[usize] {
        &self.order[..self.cutoff(l_percent)]
    }
}

/// Fraction of `truth` found in the top `l_percent`% of `ranked`.
pub fn recall_at(ranked: &RankedList, truth: &[usize], l_percent: f64) -> Result<f64> {
    if !(l_percent > 0.0 && l_percent <= 100.0) {
        return Err(Error::Domain(format!("L = {l_percent}% outside (0, 100]")));
    }
    let truth: HashSet<usize> = truth.iter().copied().collect();
    if truth.is_empty() {
        return Err(Error::Domain("recall needs at least one true outlier".into()));
    }
    let hits = ranked.top(l_percent).iter().filter(|i| truth.contains(i)).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_break_by_id() {
        let r = RankedList::from_scores(&[0.5, 0.9, 0.5, 0.1]).unwrap();
        assert_eq!(r.order(), &[1, 0, 2, 3]);
        assert!(RankedList::from_scores(&[f64::NAN]).is_err());
    }

    #[test]
    fn perfect_ranking() {
        let scores: Vec<f64> = (0..100).map(|i| if i < 5 { 1.0 } else { 0.0 }).collect();
        let r = RankedList::from_scores(&scores).unwrap();
        assert_eq!(recall_at(&r, &[0, 1, 2, 3, 4], 5.0).unwrap(), 1.0);
    }

    #[test]
    fn partial_overlap() {
        // Top five are 1, 2, 9, 4, 5.
        let mut scores = vec![0.0; 20];
        for (rank, id) in [1, 2, 9, 4, 5].into_iter().enumerate() {
            scores[id] = 10.0 - rank as f64;
        }
        let r = RankedList::from_scores(&scores).unwrap();
        assert_eq!(r.top(25.0), &[1, 2, 9, 4, 5]);
        assert!((recall_at(&r, &[1, 2, 3, 4, 5], 25.0).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn cutoff_rounds_up() {
        let r = RankedList::from_scores(&[0.0; 315]).unwrap();
        assert_eq!(r.cutoff(5.0), 16);
        assert_eq!(r.cutoff(100.0), 315);
        let r = RankedList::from_scores(&[0.0; 300]).unwrap();
        assert_eq!(r.cutoff(5.0), 15);
    }

    #[test]
    fn domain_errors() {
        let r = RankedList::from_scores(&[0.0; 4]).unwrap();
        assert!(recall_at(&r, &[], 5.0).is_err());
        assert!(recall_at(&r, &[0], 0.0).is_err());
        assert!(recall_at(&r, &[0], 101.0).is_err());
    }
}
