use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::crosstab::to_scalar;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exact between-group statistics of the classifier `1{score > 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BgfMetrics<T> {
    pub di: T,
    pub me: T,
    /// `None` when a group has no positive-label rows.
    pub eop: Option<T>,
    pub msp: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMetrics<T> {
    pub acc: T,
    pub bce: T,
    /// `None` for single-class labels.
    pub auc: Option<T>,
}

pub(crate) fn abs_diff(a: Ratio<u64>, b: Ratio<u64>) -> Ratio<u64> {
    if a >= b {
        a - b
    } else {
        b - a
    }
}

fn check_lengths(n: usize, others: &[usize]) -> Result<()> {
    if others.iter().any(|&m| m != n) {
        return Err(Error::Length(
            "metric inputs must have equal lengths".into(),
        ));
    }
    Ok(())
}

pub fn bgf_metrics<T: Scalar>(
    scores: &[T],
    sensitive: &[u8],
    labels: &[u8],
) -> Result<BgfMetrics<T>> {
    check_lengths(scores.len(), &[sensitive.len(), labels.len()])?;
    // per group: rows, predicted positives, errors, positive labels, true positives
    let mut c = [[0u64; 5]; 2];
    let mut sig = [T::zero(); 2];
    for ((&s, &z), &y) in scores.iter().zip(sensitive).zip(labels) {
        let g = &mut c[z as usize];
        let pred = (s > T::zero()) as u8;
        g[0] += 1;
        g[1] += pred as u64;
        g[2] += (pred != y) as u64;
        g[3] += y as u64;
        g[4] += (pred == 1 && y == 1) as u64;
        sig[z as usize] += s.sigmoid();
    }
    if let Some(z) = (0..2).find(|&z| c[z][0] == 0) {
        return Err(Error::EmptyGroup(format!("group {z} has no rows")));
    }
    let rate = |z: usize, k: usize, d: usize| Ratio::new(c[z][k], c[z][d]);
    let di = abs_diff(rate(1, 1, 0), rate(0, 1, 0));
    let me = abs_diff(rate(0, 2, 0), rate(1, 2, 0));
    let eop =
        (c[0][3] > 0 && c[1][3] > 0).then(|| to_scalar(abs_diff(rate(1, 4, 3), rate(0, 4, 3))));
    let mean_sig = |z: usize| sig[z] / T::lit(c[z][0] as f64);
    Ok(BgfMetrics {
        di: to_scalar(di),
        me: to_scalar(me),
        eop,
        msp: (mean_sig(1) - mean_sig(0)).abs(),
    })
}

/// Mann-Whitney AUC with ties weighted 1/2, as an exact ratio.
pub fn auc_exact<T: Scalar>(scores: &[T], labels: &[u8]) -> Option<Ratio<u64>> {
    let n_pos = labels.iter().filter(|&&y| y == 1).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    // twice the mid-rank sum of positives (1-based ranks)
    let mut twice_rank_sum = 0u64;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let twice_mid = (start + 1 + end) as u64;
        let pos = order[start..end]
            .iter()
            .filter(|&&i| labels[i] == 1)
            .count() as u64;
        twice_rank_sum += twice_mid * pos;
        start = end;
    }
    let twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    Some(Ratio::new(twice_u, 2 * n_pos * n_neg))
}

pub fn accuracy_metrics<T: Scalar>(scores: &[T], labels: &[u8]) -> Result<AccuracyMetrics<T>> {
    check_lengths(scores.len(), &[labels.len()])?;
    if scores.is_empty() {
        return Err(Error::Length("no rows".into()));
    }
    let n = scores.len() as u64;
    let correct = scores
        .iter()
        .zip(labels)
        .filter(|(&s, &y)| ((s > T::zero()) as u8) == y)
        .count() as u64;
    let bce = scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| s.softplus() - T::from_u8(y).expect("label") * s)
        .sum::<T>()
        / T::lit(n as f64);
    Ok(AccuracyMetrics {
        acc: to_scalar(Ratio::new(correct, n)),
        bce,
        auc: auc_exact(scores, labels).map(to_scalar),
    })
}
