//! Within-group Kendall concordance between a score function and the reference.
//!
//! A pair counts only when the product of score differences is strictly
//! positive, so ties in either score earn no credit.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::crosstab::to_scalar;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauMode {
    Exact,
    Sampled { pairs: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KendallTau<T> {
    pub tau: [T; 2],
    /// Unweighted mean of the two group values.
    pub tau_bar: T,
}

/// Fenwick tree over ranks.
struct Counts(Vec<u64>);

impl Counts {
    fn add(&mut self, mut i: usize) {
        i += 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted ranks strictly below `i`.
    fn below(&self, mut i: usize) -> u64 {
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

fn cmp<T: Scalar>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}

/// Strictly concordant pairs among `rows` in `O(n log n)`.
pub fn concordant_pairs<T: Scalar>(f: &[T], fstar: &[T], rows: &[usize]) -> u64 {
    let mut by_f: Vec<usize> = rows.to_vec();
    by_f.sort_by(|&a, &b| cmp(&f[a], &f[b]));
    let mut rank = vec![0usize; f.len()];
    let mut r = 0;
    for (k, &i) in by_f.iter().enumerate() {
        if k > 0 && f[i] != f[by_f[k - 1]] {
            r += 1;
        }
        rank[i] = r;
    }
    let mut order = rows.to_vec();
    order.sort_by(|&a, &b| cmp(&fstar[a], &fstar[b]));
    let mut tree = Counts(vec![0; r + 2]);
    let mut concordant = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && fstar[order[end]] == fstar[order[start]] {
            end += 1;
        }
        for &i in &order[start..end] {
            concordant += tree.below(rank[i]);
        }
        for &i in &order[start..end] {
            tree.add(rank[i]);
        }
        start = end;
    }
    concordant
}

fn group_rows(sensitive: &[u8]) -> [Vec<usize>; 2] {
    let mut g = [Vec::new(), Vec::new()];
    for (i, &z) in sensitive.iter().enumerate() {
        g[z as usize].push(i);
    }
    g
}

/// Per-group concordance with the reference scores.
pub fn kendall_tau<T: Scalar>(
    f: &[T],
    fstar: &[T],
    sensitive: &[u8],
    mode: TauMode,
) -> Result<KendallTau<T>> {
    if f.len() != fstar.len() || f.len() != sensitive.len() {
        return Err(Error::Length(
            "kendall_tau inputs must have equal lengths".into(),
        ));
    }
    let groups = group_rows(sensitive);
    if let Some(z) = (0..2).find(|&z| groups[z].len() < 2) {
        return Err(Error::EmptyGroup(format!(
            "group {z} has fewer than 2 rows"
        )));
    }
    let mut tau = [T::zero(); 2];
    match mode {
        TauMode::Exact => {
            for z in 0..2 {
                let m = groups[z].len() as u64;
                tau[z] = to_scalar(Ratio::new(
                    concordant_pairs(f, fstar, &groups[z]),
                    m * (m - 1) / 2,
                ));
            }
        }
        TauMode::Sampled { pairs, seed } => {
            if pairs == 0 {
                return Err(Error::Config(
                    "sampled Kendall tau needs at least one pair".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for z in 0..2 {
                let rows = &groups[z];
                let mut hits = 0u64;
                for _ in 0..pairs {
                    let (a, b) = sample_pair(&mut rng, rows.len());
                    let (i, j) = (rows[a], rows[b]);
                    if (f[i] - f[j]) * (fstar[i] - fstar[j]) > T::zero() {
                        hits += 1;
                    }
                }
                tau[z] = to_scalar(Ratio::new(hits, pairs as u64));
            }
        }
    }
    let two = T::lit(2.0);
    Ok(KendallTau {
        tau,
        tau_bar: (tau[0] + tau[1]) / two,
    })
}

/// Uniform draw of two distinct positions in `0..m` (`m >= 2`).
pub(crate) fn sample_pair(rng: &mut impl Rng, m: usize) -> (usize, usize) {
    let a = rng.random_range(0..m);
    let mut b = rng.random_range(0..m - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}
