//! Score-function families: linear logistic and a one-hidden-layer ReLU network.
//!
//! Gradients are computed in two stages. An objective maps the vector of
//! scores to a value and its derivative with respect to each score; the model
//! then back-propagates those score derivatives into its parameters.

mod design;
mod objective;

pub use design::Design;
pub use objective::{CrossEntropy, ScoreObjective};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Name of the hidden-layer nonlinearity, echoed into reports.
pub const HIDDEN_ACTIVATION: &str = "relu";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Mlp,
}

impl ModelKind {
    /// Parameter count for input dimension `p`. The network has `p` hidden units.
    pub fn n_params(self, p: usize) -> usize {
        match self {
            ModelKind::Linear => p + 1,
            ModelKind::Mlp => p * p + 2 * p + 1,
        }
    }
}

/// Flat parameter container. For `Mlp` the layout is the row-major `p x p`
/// first-layer matrix, then its `p` biases, the `p` output weights and the
/// output bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model<T> {
    kind: ModelKind,
    p: usize,
    seed: u64,
    params: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle<T> {
    pub value: T,
    pub grad: Vec<T>,
    /// Scores at which the objective was evaluated.
    pub scores: Vec<T>,
}

impl<T: Scalar> Model<T> {
    pub fn new(kind: ModelKind, p: usize, seed: u64, params: Vec<T>) -> Result<Self> {
        let m = Self {
            kind,
            p,
            seed,
            params,
        };
        m.validate()?;
        Ok(m)
    }

    /// Checks the parameter count and finiteness; used after deserialization.
    pub fn validate(&self) -> Result<()> {
        let want = self.kind.n_params(self.p);
        if self.params.len() != want {
            return Err(Error::Dimension {
                expected: want,
                got: self.params.len(),
            });
        }
        if self.params.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                term: "model parameters".into(),
            });
        }
        Ok(())
    }

    /// Linear models start at zero. Network weights are standard normal draws
    /// truncated at three standard deviations and scaled by `1/sqrt(fan_in)`;
    /// biases start at zero.
    pub fn init(kind: ModelKind, p: usize, seed: u64) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("input dimension must be at least 1".into()));
        }
        let mut params = vec![T::zero(); kind.n_params(p)];
        if kind == ModelKind::Mlp {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = 1.0 / (p as f64).sqrt();
            let mut draw = || loop {
                let z: f64 = rng.sample(StandardNormal);
                if z.abs() <= 3.0 {
                    return T::lit(z * scale);
                }
            };
            for w in &mut params[..p * p] {
                *w = draw();
            }
            let out = p * p + p;
            for w in &mut params[out..out + p] {
                *w = draw();
            }
        }
        Self::new(kind, p, seed, params)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub(crate) fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn with_params(&self, params: Vec<T>) -> Result<Self> {
        Self::new(self.kind, self.p, self.seed, params)
    }

    /// Score of one feature row.
    pub fn score(&self, x: &[T]) -> Result<T> {
        if x.len() != self.p {
            return Err(Error::Dimension {
                expected: self.p,
                got: x.len(),
            });
        }
        let p = self.p;
        Ok(match self.kind {
            ModelKind::Linear => {
                self.params[..p]
                    .iter()
                    .zip(x)
                    .map(|(&w, &v)| w * v)
                    .sum::<T>()
                    + self.params[p]
            }
            ModelKind::Mlp => {
                let (w1, rest) = self.params.split_at(p * p);
                let (b1, rest) = rest.split_at(p);
                let (w2, b2) = rest.split_at(p);
                let mut s = b2[0];
                for k in 0..p {
                    let pre = w1[k * p..(k + 1) * p]
                        .iter()
                        .zip(x)
                        .map(|(&w, &v)| w * v)
                        .sum::<T>()
                        + b1[k];
                    s += w2[k] * pre.max(T::zero());
                }
                s
            }
        })
    }

    /// Predicted class `1{score > 0}`.
    pub fn classify(&self, x: &[T]) -> Result<u8> {
        Ok((self.score(x)? > T::zero()) as u8)
    }

    fn check_design(&self, design: &Design<T>) -> Result<()> {
        if design.p() != self.p {
            return Err(Error::Dimension {
                expected: self.p,
                got: design.p(),
            });
        }
        Ok(())
    }

    /// Scores of every row; the hidden pre-activations are returned for networks.
    fn forward(&self, design: &Design<T>) -> (Vec<T>, Option<Vec<T>>) {
        let p = self.p;
        let n = design.n();
        let mut scores = vec![T::zero(); n];
        match self.kind {
            ModelKind::Linear => {
                design.matvec(&self.params[..p], self.params[p], &mut scores);
                (scores, None)
            }
            ModelKind::Mlp => {
                let (w1, rest) = self.params.split_at(p * p);
                let (b1, rest) = rest.split_at(p);
                let (w2, b2) = rest.split_at(p);
                let mut pre = vec![T::zero(); n * p];
                design.matmul(w1, b1, p, &mut pre);
                for (i, s) in scores.iter_mut().enumerate() {
                    *s = pre[i * p..(i + 1) * p]
                        .iter()
                        .zip(w2)
                        .map(|(&a, &w)| a.max(T::zero()) * w)
                        .sum::<T>()
                        + b2[0];
                }
                (scores, Some(pre))
            }
        }
    }

    pub fn scores(&self, design: &Design<T>) -> Result<Vec<T>> {
        self.check_design(design)?;
        Ok(self.forward(design).0)
    }

    pub fn scores_on(&self, ds: &Dataset<T>) -> Result<Vec<T>> {
        self.scores(&Design::new(ds.features()))
    }

    /// Parameter gradient given `d objective / d score_i`.
    fn backward(&self, design: &Design<T>, hidden: Option<&[T]>, score_grad: &[T]) -> Vec<T> {
        let p = self.p;
        let mut grad = vec![T::zero(); self.params.len()];
        match self.kind {
            ModelKind::Linear => {
                design.tmatvec(score_grad, &mut grad[..p]);
                grad[p] = score_grad.iter().copied().sum();
            }
            ModelKind::Mlp => {
                let pre = hidden.expect("network forward pass keeps activations");
                let w2 = &self.params[p * p + p..p * p + 2 * p];
                let n = design.n();
                let mut delta = vec![T::zero(); n * p];
                let (mut g_b1, mut g_w2) = (vec![T::zero(); p], vec![T::zero(); p]);
                for i in 0..n {
                    let g = score_grad[i];
                    if g == T::zero() {
                        continue;
                    }
                    for k in 0..p {
                        let a = pre[i * p + k];
                        if a > T::zero() {
                            g_w2[k] += g * a;
                            let d = g * w2[k];
                            delta[i * p + k] = d;
                            g_b1[k] += d;
                        }
                    }
                }
                design.tmatmul(&delta, p, &mut grad[..p * p]);
                grad[p * p..p * p + p].copy_from_slice(&g_b1);
                grad[p * p + p..p * p + 2 * p].copy_from_slice(&g_w2);
                grad[p * p + 2 * p] = score_grad.iter().copied().sum();
            }
        }
        grad
    }

    /// Value and exact parameter gradient of a score-space objective.
    pub fn objective_gradient_design(
        &self,
        obj: &dyn ScoreObjective<T>,
        design: &Design<T>,
    ) -> Result<GradientBundle<T>> {
        self.check_design(design)?;
        let (scores, hidden) = self.forward(design);
        let mut score_grad = vec![T::zero(); scores.len()];
        let value = obj.evaluate_checked(&scores, &mut score_grad)?;
        let grad = self.backward(design, hidden.as_deref(), &score_grad);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                term: format!("{} (parameter gradient)", obj.name()),
            });
        }
        Ok(GradientBundle {
            value,
            grad,
            scores,
        })
    }
}

/// Value and gradient of `obj` for `m` on `batch`.
pub fn objective_gradient<T: Scalar>(
    m: &Model<T>,
    obj: &dyn ScoreObjective<T>,
    batch: &Dataset<T>,
) -> Result<GradientBundle<T>> {
    m.objective_gradient_design(obj, &Design::new(batch.features()))
}
