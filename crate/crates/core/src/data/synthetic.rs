use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetMeta};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const SIGNAL: f64 = 2.0;

/// Generating logistic model of a synthetic dataset, in raw (unstandardized) units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub group_gap: f64,
    pub seed: u64,
}

impl SyntheticTruth {
    /// Scores of the Bayes rule `1{b'x + c > 0}` on raw feature rows.
    pub fn bayes_scores<T: Scalar>(&self, raw: &Array2<T>) -> Vec<T> {
        raw.rows()
            .into_iter()
            .map(|row| {
                let s: f64 = row
                    .iter()
                    .zip(&self.coefficients)
                    .map(|(&x, c)| x.as_f64() * c)
                    .sum();
                T::lit(s + self.intercept)
            })
            .collect()
    }
}

/// Gaussian features and labels drawn from a known logistic model. Rows
/// alternate between the groups; group 1 is shifted along the coefficient
/// direction so that its true score is `group_gap` higher on average.
pub fn make_synthetic<T: Scalar>(
    n: usize,
    p: usize,
    group_gap: f64,
    seed: u64,
) -> Result<Dataset<T>> {
    if n < 4 || p < 1 {
        return Err(Error::Config(format!(
            "synthetic data needs n >= 4 and p >= 1, got n = {n}, p = {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coefficients: Vec<f64> = (0..p)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let norm = coefficients
        .iter()
        .map(|c| c * c)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    coefficients.iter_mut().for_each(|c| *c *= SIGNAL / norm);
    let norm2 = SIGNAL * SIGNAL;

    let mut raw = Array2::<T>::zeros((n, p));
    let mut sensitive = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let z = (i % 2) as u8;
        let mut score = 0.0;
        for j in 0..p {
            let shift = if z == 1 {
                group_gap * coefficients[j] / norm2
            } else {
                0.0
            };
            let x = rng.sample::<f64, _>(StandardNormal) + shift;
            raw[[i, j]] = T::lit(x);
            score += coefficients[j] * x;
        }
        let prob = 1.0 / (1.0 + (-score).exp());
        labels.push(rng.random_bool(prob.clamp(0.0, 1.0)) as u8);
        sensitive.push(z);
    }
    let names = (0..p).map(|j| format!("x{j}")).collect();
    let meta = DatasetMeta {
        source: format!("synthetic(n={n}, p={p}, group_gap={group_gap}, seed={seed})"),
        sensitive_mapping: "row index parity".into(),
        synthetic: Some(SyntheticTruth {
            coefficients,
            intercept: 0.0,
            group_gap,
            seed,
        }),
        ..DatasetMeta::default()
    };
    Dataset::from_raw("synthetic", raw, sensitive, labels, names, None, meta)
}
