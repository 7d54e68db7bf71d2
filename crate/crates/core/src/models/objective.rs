use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A differentiable scalar function of the score vector of one batch.
pub trait ScoreObjective<T: Scalar>: Send + Sync {
    fn name(&self) -> String;

    /// Returns the value and overwrites `grad` with `d value / d score_i`.
    fn evaluate(&self, scores: &[T], grad: &mut [T]) -> T;

    /// [`ScoreObjective::evaluate`], failing with the term's name on a non-finite result.
    fn evaluate_checked(&self, scores: &[T], grad: &mut [T]) -> Result<T> {
        let v = self.evaluate(scores, grad);
        if !v.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite { term: self.name() });
        }
        Ok(v)
    }
}

/// Mean binary cross-entropy of `sigmoid(score)` against the labels.
#[derive(Debug, Clone)]
pub struct CrossEntropy<T> {
    targets: Vec<T>,
}

impl<T: Scalar> CrossEntropy<T> {
    pub fn new(labels: &[u8]) -> Self {
        Self {
            targets: labels
                .iter()
                .map(|&y| T::from_u8(y).expect("0 or 1"))
                .collect(),
        }
    }
}

impl<T: Scalar> ScoreObjective<T> for CrossEntropy<T> {
    fn name(&self) -> String {
        "cross_entropy".into()
    }

    fn evaluate(&self, scores: &[T], grad: &mut [T]) -> T {
        let n = T::from_usize_lossy(scores.len());
        let mut total = T::zero();
        for ((g, &s), &y) in grad.iter_mut().zip(scores).zip(&self.targets) {
            // -[y ln sigma(s) + (1 - y) ln(1 - sigma(s))] = softplus(s) - y s
            total += s.softplus() - y * s;
            *g = (s.sigmoid() - y) / n;
        }
        total / n
    }
}
