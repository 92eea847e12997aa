//! Ranking metrics for binary scores: AUC_ROC, Max_KS2 and the KS-area form of AUC.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, Result};

/// Scores with binary labels; both classes present, all scores finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSample {
    scores: Vec<f64>,
    labels: Vec<bool>,
    positives: usize,
}

impl ScoredSample {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::Contract(alloc::format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Domain("scores must be finite".into()));
        }
        let positives = labels.iter().filter(|&&l| l).count();
        if positives == 0 || positives == labels.len() {
            return Err(Error::MetricUndefined(alloc::format!(
                "sample of {} needs both classes ({} positive)",
                labels.len(),
                positives
            )));
        }
        Ok(ScoredSample {
            scores,
            labels,
            positives,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn positives(&self) -> usize {
        self.positives
    }

    pub fn negatives(&self) -> usize {
        self.labels.len() - self.positives
    }

    /// (positives, negatives) per distinct score, in ascending score order.
    fn tie_groups(&self) -> Vec<(u64, u64)> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| {
            self.scores[a]
                .partial_cmp(&self.scores[b])
                .unwrap_or(Ordering::Equal)
        });
        let mut groups: Vec<(u64, u64)> = Vec::new();
        let mut last = f64::NAN;
        for i in order {
            let s = self.scores[i];
            if groups.is_empty() || s != last {
                groups.push((0, 0));
                last = s;
            }
            let g = groups.last_mut().unwrap();
            if self.labels[i] {
                g.0 += 1;
            } else {
                g.1 += 1;
            }
        }
        groups
    }
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Integer pair counts over sorted tie groups, O(n log n).
pub fn roc_auc(s: &ScoredSample) -> f64 {
    let mut negatives_below = 0u64;
    let mut wins = 0u64;
    let mut ties = 0u64;
    for (pos, neg) in s.tie_groups() {
        wins += pos * negatives_below;
        ties += pos * neg;
        negatives_below += neg;
    }
    let pairs = s.positives() as f64 * s.negatives() as f64;
    (wins as f64 + 0.5 * ties as f64) / pairs
}

/// Largest gap between the empirical score CDFs of the two classes,
/// evaluated at every observed score.
pub fn max_ks2(s: &ScoredSample) -> f64 {
    let n1 = s.positives() as f64;
    let n0 = s.negatives() as f64;
    let (mut c1, mut c0) = (0u64, 0u64);
    let mut best = 0.0f64;
    for (pos, neg) in s.tie_groups() {
        c1 += pos;
        c0 += neg;
        best = best.max((c1 as f64 / n1 - c0 as f64 / n0).abs());
    }
    best
}

/// AUC obtained as one half plus the area between the class CDFs, integrated
/// against the negative-class distribution:
///
/// ```text
/// 0.5 + sum over negative scores t of (F0(t) - F1(t)) / n0
/// ```
///
/// CDFs are taken at the midpoint of their jumps, so the F0 term sums to
/// exactly one half and the result equals [`roc_auc`] with or without ties.
pub fn auc_via_ks_area(s: &ScoredSample) -> f64 {
    let n1 = s.positives() as f64;
    let n0 = s.negatives() as f64;
    let (mut c1, mut c0) = (0u64, 0u64);
    let mut area = 0.0;
    for (pos, neg) in s.tie_groups() {
        if neg > 0 {
            let f0 = (c0 as f64 + 0.5 * neg as f64) / n0;
            let f1 = (c1 as f64 + 0.5 * pos as f64) / n1;
            area += (f0 - f1) * neg as f64 / n0;
        }
        c1 += pos;
        c0 += neg;
    }
    0.5 + area
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample(pos: &[f64], neg: &[f64]) -> ScoredSample {
        let mut scores = pos.to_vec();
        scores.extend_from_slice(neg);
        let mut labels = vec![true; pos.len()];
        labels.extend(vec![false; neg.len()]);
        ScoredSample::new(scores, labels).unwrap()
    }

    #[test]
    fn perfect_separation() {
        let s = sample(&[0.9, 0.7], &[0.6, 0.4]);
        assert_eq!(roc_auc(&s), 1.0);
        assert_eq!(max_ks2(&s), 1.0);
        assert_eq!(auc_via_ks_area(&s), 1.0);
    }

    #[test]
    fn partial_overlap() {
        // pairs: 0.8>0.6, 0.8>0.2, 0.4>0.2 win; 0.4<0.6 loses
        let s = sample(&[0.8, 0.4], &[0.6, 0.2]);
        assert_eq!(roc_auc(&s), 0.75);
        assert_eq!(max_ks2(&s), 0.5);
        assert_eq!(auc_via_ks_area(&s), 0.75);
    }

    #[test]
    fn all_ties_and_identical_classes() {
        let s = sample(&[0.3, 0.3, 0.3], &[0.3, 0.3]);
        assert_eq!(roc_auc(&s), 0.5);
        assert_eq!(max_ks2(&s), 0.0);
        assert_eq!(auc_via_ks_area(&s), 0.5);
        let same = sample(&[0.1, 0.5, 0.9], &[0.9, 0.1, 0.5]);
        assert_eq!(roc_auc(&same), 0.5);
        assert_eq!(max_ks2(&same), 0.0);
        assert_eq!(auc_via_ks_area(&same), 0.5);
    }

    #[test]
    fn undefined_for_single_class() {
        assert!(matches!(
            ScoredSample::new(vec![0.1, 0.2], vec![true, true]),
            Err(Error::MetricUndefined(_))
        ));
        assert!(matches!(
            ScoredSample::new(vec![0.1, f64::INFINITY], vec![true, false]),
            Err(Error::Domain(_))
        ));
    }
}
