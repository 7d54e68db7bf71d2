use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-group monotone piecewise-linear maps onto a common score distribution.
/// `knots[z]` holds `(input, output)` pairs, strictly increasing in input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupQuantileMap<T> {
    pub knots: [Vec<(T, T)>; 2],
}

/// Maps each group's empirical quantile function onto the group-size-weighted
/// average of both quantile functions. Group `z`'s `k`-th smallest score
/// (1-based) is sent to the barycenter at level `(k - 1/2) / n_z`.
pub fn fit_quantile_repair<T: Scalar>(
    scores: &[T],
    sensitive: &[u8],
) -> Result<GroupQuantileMap<T>> {
    if scores.len() != sensitive.len() {
        return Err(Error::Length("scores and groups differ in length".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite {
            term: "scores".into(),
        });
    }
    let mut sorted: [Vec<T>; 2] = [Vec::new(), Vec::new()];
    for (&s, &z) in scores.iter().zip(sensitive) {
        if z > 1 {
            return Err(Error::Schema(format!("sensitive value {z} is not binary")));
        }
        sorted[z as usize].push(s);
    }
    for (z, v) in sorted.iter_mut().enumerate() {
        if v.len() < 2 {
            return Err(Error::EmptyGroup(format!(
                "quantile repair needs two scores in group {z}"
            )));
        }
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    }
    let n = [sorted[0].len(), sorted[1].len()];
    let total = T::from_usize_lossy(n[0] + n[1]);
    let weight = n.map(|m| T::from_usize_lossy(m) / total);
    // Q_g at level (2k - 1) / (2 n_z): the ceil(level * n_g)-th order statistic
    let quantile = |g: usize, k: usize, nz: usize| {
        let idx = ((2 * k - 1) * n[g]).div_ceil(2 * nz);
        sorted[g][idx - 1]
    };
    let mut knots: [Vec<(T, T)>; 2] = [Vec::new(), Vec::new()];
    for z in 0..2 {
        let mut k = 1;
        while k <= n[z] {
            let x = sorted[z][k - 1];
            let (mut sum, mut count) = (T::zero(), 0usize);
            while k <= n[z] && sorted[z][k - 1] == x {
                sum += weight[0] * quantile(0, k, n[z]) + weight[1] * quantile(1, k, n[z]);
                count += 1;
                k += 1;
            }
            // tied inputs share one knot at the mean of their targets
            let y = if count == 1 {
                sum
            } else {
                sum / T::from_usize_lossy(count)
            };
            knots[z].push((x, y));
        }
        // averaging may reorder by rounding; keep the map monotone
        for i in 1..knots[z].len() {
            if knots[z][i].1 < knots[z][i - 1].1 {
                knots[z][i].1 = knots[z][i - 1].1;
            }
        }
    }
    Ok(GroupQuantileMap { knots })
}

impl<T: Scalar> GroupQuantileMap<T> {
    /// `m_z(score)`, interpolating linearly between knots and clamping outside them.
    pub fn apply(&self, score: T, z: u8) -> T {
        let k = &self.knots[z as usize];
        let first = k[0];
        let last = k[k.len() - 1];
        if score <= first.0 {
            return first.1;
        }
        if score >= last.0 {
            return last.1;
        }
        let hi = k.partition_point(|&(x, _)| x <= score);
        let (x0, y0) = k[hi - 1];
        let (x1, y1) = k[hi];
        if score == x0 {
            return y0;
        }
        y0 + (y1 - y0) * (score - x0) / (x1 - x0)
    }

    pub fn apply_all(&self, scores: &[T], sensitive: &[u8]) -> Result<Vec<T>> {
        if scores.len() != sensitive.len() {
            return Err(Error::Length("scores and groups differ in length".into()));
        }
        Ok(scores
            .iter()
            .zip(sensitive)
            .map(|(&s, &z)| self.apply(s, z))
            .collect())
    }
}
