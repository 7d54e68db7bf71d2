use std::cmp::Ordering;

use log::warn;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::Direction;
use crate::models::Model;
use crate::scalar::Scalar;

/// Balanced relabeling: `promote` rows of the under-served group go from 0
/// to 1, `demote` rows of the other group go from 1 to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassagingPlan<T> {
    pub promote: Vec<usize>,
    pub demote: Vec<usize>,
    pub ranker: Model<T>,
    /// Group whose positive rate is raised.
    pub raised_group: u8,
    pub required_swaps: usize,
    /// False when the candidates ran out before the rate bound was met.
    pub complete: bool,
}

/// Positive-rate gap bound after `k` swaps: `|r_lo(k) - r_hi(k)| <= 1 / min(n_lo, n_hi)`.
fn within_bound(k: u64, pos: [u64; 2], n: [u64; 2]) -> bool {
    let lo = Ratio::new(pos[0] + k, n[0]);
    let hi = Ratio::new(pos[1] - k.min(pos[1]), n[1]);
    let gap = if lo >= hi { lo - hi } else { hi - lo };
    gap <= Ratio::new(1, n[0].min(n[1]))
}

/// Smallest `k` meeting the bound for a raised group with `pos[0]` of `n[0]`
/// positives and the other with `pos[1]` of `n[1]`; `None` if even
/// `pos[1].min(n[0] - pos[0])` swaps do not suffice.
pub fn swap_count(pos: [u64; 2], n: [u64; 2]) -> Option<u64> {
    let limit = pos[1].min(n[0] - pos[0]);
    (0..=limit).find(|&k| within_bound(k, pos, n))
}

/// Returns a relabeled copy of `train` whose group positive rates differ by at
/// most one row's worth, using the fewest balanced swaps. Candidates are
/// ranked by `ranker`: the highest-scored negatives of the under-served group
/// are promoted and the lowest-scored positives of the other group demoted.
pub fn massage<T: Scalar>(
    train: &Dataset<T>,
    ranker: &Model<T>,
) -> Result<(Dataset<T>, MassagingPlan<T>)> {
    let scores = ranker.scores_on(train)?;
    let (z, y) = (train.sensitive(), train.labels());
    let mut n = [0u64; 2];
    let mut pos = [0u64; 2];
    for (&zi, &yi) in z.iter().zip(y) {
        n[zi as usize] += 1;
        pos[zi as usize] += yi as u64;
    }
    if n.contains(&0) {
        return Err(Error::EmptyGroup("massaging needs both groups".into()));
    }
    let direction = Direction::from_rates(Ratio::new(pos[0], n[0]), Ratio::new(pos[1], n[1]));
    let (lo, hi) = direction.groups();
    let pos_pair = [pos[lo], pos[hi]];
    let n_pair = [n[lo], n[hi]];
    let by_score = |a: &usize, b: &usize| {
        scores[*a]
            .partial_cmp(&scores[*b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    };
    let mut up: Vec<usize> = (0..train.n())
        .filter(|&i| z[i] as usize == lo && y[i] == 0)
        .collect();
    up.sort_by(|a, b| by_score(b, a).then(a.cmp(b)));
    let mut down: Vec<usize> = (0..train.n())
        .filter(|&i| z[i] as usize == hi && y[i] == 1)
        .collect();
    down.sort_by(by_score);
    let (k, complete) = match swap_count(pos_pair, n_pair) {
        Some(k) => (k as usize, true),
        None => {
            let k = up.len().min(down.len());
            warn!("massaging: the rate bound is not met after all {k} available swaps");
            (k, false)
        }
    };
    let mut promote = up[..k].to_vec();
    let mut demote = down[..k].to_vec();
    promote.sort_unstable();
    demote.sort_unstable();
    let mut labels = y.to_vec();
    for &i in &promote {
        labels[i] = 1;
    }
    for &i in &demote {
        labels[i] = 0;
    }
    let plan = MassagingPlan {
        promote,
        demote,
        ranker: ranker.clone(),
        raised_group: lo as u8,
        required_swaps: k,
        complete,
    };
    Ok((train.with_labels(labels)?, plan))
}
