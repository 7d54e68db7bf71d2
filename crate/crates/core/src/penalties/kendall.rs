use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{hinge, hinge_slope};
use crate::error::{Error, Result};
use crate::metrics::sample_pair;
use crate::models::ScoreObjective;
use crate::scalar::Scalar;

/// Hinge relaxation of one minus the within-group Kendall concordance with
/// the reference scores, averaged over both groups.
#[derive(Debug, Clone)]
pub struct KendallSurrogate<T> {
    /// Per group, `(i, j, fstar_i - fstar_j)`.
    pairs: [Vec<(usize, usize, T)>; 2],
}

impl<T: Scalar> KendallSurrogate<T> {
    /// Draws `pairs` within-group pairs once from `seed`. Groups with at most
    /// `pairs` distinct pairs use all of them.
    pub fn new(fstar_scores: &[T], sensitive: &[u8], pairs: usize, seed: u64) -> Result<Self> {
        if fstar_scores.len() != sensitive.len() {
            return Err(Error::Length(
                "reference scores and groups differ in length".into(),
            ));
        }
        if pairs == 0 {
            return Err(Error::Config(
                "kendall surrogate needs at least one pair".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = [Vec::new(), Vec::new()];
        for z in 0..2u8 {
            let rows: Vec<usize> = (0..sensitive.len())
                .filter(|&i| sensitive[i] == z)
                .collect();
            let m = rows.len();
            if m < 2 {
                return Err(Error::EmptyGroup(format!(
                    "kendall surrogate needs two rows in group {z}"
                )));
            }
            let all = m * (m - 1) / 2;
            let chosen: Vec<(usize, usize)> = if pairs >= all {
                (0..m)
                    .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
                    .collect()
            } else {
                (0..pairs).map(|_| sample_pair(&mut rng, m)).collect()
            };
            out[z as usize] = chosen
                .into_iter()
                .map(|(a, b)| {
                    let (i, j) = (rows[a], rows[b]);
                    (i, j, fstar_scores[i] - fstar_scores[j])
                })
                .collect();
        }
        Ok(Self { pairs: out })
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs[0].len() + self.pairs[1].len()
    }
}

impl<T: Scalar> ScoreObjective<T> for KendallSurrogate<T> {
    fn name(&self) -> String {
        "kendall".into()
    }

    fn evaluate(&self, scores: &[T], grad: &mut [T]) -> T {
        grad.iter_mut().for_each(|g| *g = T::zero());
        let mut total = T::zero();
        for pairs in &self.pairs {
            let w = T::one() / T::from_usize_lossy(2 * pairs.len());
            let mut sum = T::zero();
            for &(i, j, d) in pairs {
                let t = -(scores[i] - scores[j]) * d;
                sum += hinge(t);
                if hinge_slope(t) != T::zero() {
                    grad[i] -= w * d;
                    grad[j] += w * d;
                }
            }
            total += sum / T::from_usize_lossy(pairs.len());
        }
        total / T::lit(2.0)
    }
}
