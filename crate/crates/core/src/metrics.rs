//! Ranking metrics.

use alloc::vec::Vec;

use crate::curves::Label;
use crate::error::{Error, Result};

/// Area under the ROC curve of `scores` (higher means more anomalous).
///
/// Equals the fraction of (anomaly, normal) pairs ranked correctly, ties
/// counting one half. Computed from midranks in `O(n log n)`.
pub fn auc(scores: &[f64], labels: &[Label]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            found: scores.len(),
        });
    }
    if let Some(index) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let positives = labels.iter().filter(|l| l.is_anomaly()).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start..end (1-based: start+1 ..= end) share their mean
        let midrank = (start + end + 1) as f64 / 2.0;
        let tied_positives = order[start..end]
            .iter()
            .filter(|&&i| labels[i].is_anomaly())
            .count();
        rank_sum += midrank * tied_positives as f64;
        start = end;
    }
    let (p, q) = (positives as f64, negatives as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}
