//! Differentiable surrogates of the between-group and within-group fairness
//! measures, and the composite training objective built from them.

mod bgf;
mod kendall;
mod wgf;

pub use bgf::GroupGap;
pub use kendall::KendallSurrogate;
pub use wgf::WgfSurrogate;

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{predictions, Direction};
use crate::models::{CrossEntropy, Model, ScoreObjective};
use crate::scalar::Scalar;

/// Pairs drawn per group for the Kendall surrogate.
pub const DEFAULT_KENDALL_PAIRS: usize = 50_000;

/// `(1 + t)_+`
pub fn hinge<T: Scalar>(t: T) -> T {
    (T::one() + t).max(T::zero())
}

/// Derivative of [`hinge`], taken as 0 at the knee.
pub(crate) fn hinge_slope<T: Scalar>(t: T) -> T {
    if T::one() + t > T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BgfKind {
    HingeDi,
    HingeMe,
    HingeEop,
    CovDi,
    FnncDi,
    FnncEop,
    Msp,
    None,
}

impl BgfKind {
    pub const ALL: [BgfKind; 8] = [
        BgfKind::HingeDi,
        BgfKind::HingeMe,
        BgfKind::HingeEop,
        BgfKind::CovDi,
        BgfKind::FnncDi,
        BgfKind::FnncEop,
        BgfKind::Msp,
        BgfKind::None,
    ];

    /// The exact metric this surrogate targets.
    pub fn metric(self) -> BgfMetric {
        match self {
            BgfKind::HingeDi | BgfKind::CovDi | BgfKind::FnncDi | BgfKind::None => BgfMetric::Di,
            BgfKind::HingeMe => BgfMetric::Me,
            BgfKind::HingeEop | BgfKind::FnncEop => BgfMetric::Eop,
            BgfKind::Msp => BgfMetric::Msp,
        }
    }
}

impl fmt::Display for BgfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BgfKind::HingeDi => "hinge_di",
            BgfKind::HingeMe => "hinge_me",
            BgfKind::HingeEop => "hinge_eop",
            BgfKind::CovDi => "cov_di",
            BgfKind::FnncDi => "fnnc_di",
            BgfKind::FnncEop => "fnnc_eop",
            BgfKind::Msp => "msp",
            BgfKind::None => "none",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BgfMetric {
    Di,
    Me,
    Eop,
    Msp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WgfKind {
    Undirected,
    DirectedDi,
    DirectedEop,
    Kendall,
    None,
}

impl WgfKind {
    pub const ALL: [WgfKind; 5] = [
        WgfKind::Undirected,
        WgfKind::DirectedDi,
        WgfKind::DirectedEop,
        WgfKind::Kendall,
        WgfKind::None,
    ];

    pub fn metric(self) -> WgfMetric {
        match self {
            WgfKind::Undirected | WgfKind::None => WgfMetric::Wgf,
            WgfKind::DirectedDi => WgfMetric::DwgfDi,
            WgfKind::DirectedEop => WgfMetric::DwgfEop,
            WgfKind::Kendall => WgfMetric::TauBar,
        }
    }
}

impl fmt::Display for WgfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WgfKind::Undirected => "undirected",
            WgfKind::DirectedDi => "directed_di",
            WgfKind::DirectedEop => "directed_eop",
            WgfKind::Kendall => "kendall",
            WgfKind::None => "none",
        };
        f.write_str(s)
    }
}

/// The exact within-group statistic a surrogate targets. Smaller is better
/// except for `TauBar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WgfMetric {
    Wgf,
    DwgfDi,
    DwgfEop,
    TauBar,
}

fn default_pairs() -> usize {
    DEFAULT_KENDALL_PAIRS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySpec {
    pub bgf: BgfKind,
    pub wgf: WgfKind,
    pub lambda: f64,
    pub eta: f64,
    /// Target band for the exact between-group metric.
    pub epsilon: f64,
    /// Target band for the exact within-group metric.
    pub delta: f64,
    #[serde(default = "default_pairs")]
    pub kendall_pairs: usize,
}

impl PenaltySpec {
    pub fn new(
        bgf: BgfKind,
        wgf: WgfKind,
        lambda: f64,
        eta: f64,
        epsilon: f64,
        delta: f64,
    ) -> Result<Self> {
        let s = Self {
            bgf,
            wgf,
            lambda,
            eta,
            epsilon,
            delta,
            kendall_pairs: DEFAULT_KENDALL_PAIRS,
        };
        s.validate()?;
        Ok(s)
    }

    /// No penalties; the targets of 1 are vacuous since every metric lies in [0, 1].
    pub fn unconstrained() -> Self {
        Self {
            bgf: BgfKind::None,
            wgf: WgfKind::None,
            lambda: 0.0,
            eta: 0.0,
            epsilon: 1.0,
            delta: 1.0,
            kendall_pairs: DEFAULT_KENDALL_PAIRS,
        }
    }

    pub fn with_weights(&self, lambda: f64, eta: f64) -> Self {
        Self {
            lambda,
            eta,
            ..*self
        }
    }

    /// Score-function mode: the model is judged as a ranking, not a classifier.
    pub fn is_score_mode(&self) -> bool {
        self.wgf == WgfKind::Kendall || self.bgf == BgfKind::Msp
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("eta", self.eta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        for (name, v) in [("epsilon", self.epsilon), ("delta", self.delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.kendall_pairs == 0 {
            return Err(Error::Config("kendall_pairs must be positive".into()));
        }
        let ok = match self.wgf {
            WgfKind::Undirected | WgfKind::None => true,
            WgfKind::Kendall => matches!(self.bgf, BgfKind::Msp | BgfKind::None),
            WgfKind::DirectedDi => {
                matches!(
                    self.bgf,
                    BgfKind::HingeDi | BgfKind::CovDi | BgfKind::FnncDi | BgfKind::None
                )
            }
            WgfKind::DirectedEop => matches!(
                self.bgf,
                BgfKind::HingeEop | BgfKind::FnncEop | BgfKind::None
            ),
        };
        if !ok {
            return Err(Error::Config(format!(
                "wgf penalty {} cannot be combined with bgf penalty {}",
                self.wgf, self.bgf
            )));
        }
        Ok(())
    }
}

/// The unconstrained reference model together with its predictions on the
/// rows it is bound to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceModel<T> {
    pub fstar: Model<T>,
    pub fstar_preds: Vec<u8>,
    pub fstar_scores: Vec<T>,
    /// `p_y_given_z[z][y] = Pr(C* = y | Z = z)`
    pub p_y_given_z: [[T; 2]; 2],
}

impl<T: Scalar> ReferenceModel<T> {
    pub fn new(fstar: Model<T>, ds: &Dataset<T>) -> Result<Self> {
        let fstar_scores = fstar.scores_on(ds)?;
        let fstar_preds = predictions(&fstar_scores);
        let mut counts = [[0u64; 2]; 2];
        for (&z, &p) in ds.sensitive().iter().zip(&fstar_preds) {
            counts[z as usize][p as usize] += 1;
        }
        let p_y_given_z = counts.map(|c| {
            let n = (c[0] + c[1]).max(1);
            c.map(|k| T::lit(k as f64 / n as f64))
        });
        Ok(Self {
            fstar,
            fstar_preds,
            fstar_scores,
            p_y_given_z,
        })
    }

    /// Group the directed penalty raises first; read off the exact reference rates.
    pub fn direction(&self, sensitive: &[u8]) -> Direction {
        let mut c = [[0u64; 2]; 2];
        for (&z, &p) in sensitive.iter().zip(&self.fstar_preds) {
            c[z as usize][p as usize] += 1;
        }
        let rate = |z: usize| Ratio::new(c[z][1], (c[z][0] + c[z][1]).max(1));
        Direction::from_rates(rate(0), rate(1))
    }
}

pub type BoxedObjective<T> = Box<dyn ScoreObjective<T>>;

pub fn bgf_objective<T: Scalar>(
    kind: BgfKind,
    sensitive: &[u8],
    labels: &[u8],
) -> Result<Option<BoxedObjective<T>>> {
    Ok(GroupGap::new(kind, sensitive, labels)?.map(|g| Box::new(g) as BoxedObjective<T>))
}

pub fn wgf_objective<T: Scalar>(
    spec: &PenaltySpec,
    reference: &ReferenceModel<T>,
    sensitive: &[u8],
    labels: &[u8],
    seed: u64,
) -> Result<Option<BoxedObjective<T>>> {
    if reference.fstar_preds.len() != sensitive.len() {
        return Err(Error::Length(
            "reference model is bound to a different row set".into(),
        ));
    }
    if spec.wgf == WgfKind::Kendall {
        let k =
            KendallSurrogate::new(&reference.fstar_scores, sensitive, spec.kendall_pairs, seed)?;
        return Ok(Some(Box::new(k)));
    }
    Ok(
        WgfSurrogate::new(spec.wgf, &reference.fstar_preds, sensitive, labels)?
            .map(|w| Box::new(w) as BoxedObjective<T>),
    )
}

/// Values of the individual terms at one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveParts<T> {
    pub loss: T,
    pub bgf: Option<T>,
    pub wgf: Option<T>,
    pub total: T,
}

/// `loss + lambda * bgf + eta * wgf`. Terms with zero weight are never
/// evaluated during training.
pub struct PenalizedObjective<T: Scalar> {
    loss: CrossEntropy<T>,
    bgf: Option<BoxedObjective<T>>,
    wgf: Option<BoxedObjective<T>>,
    lambda: T,
    eta: T,
}

impl<T: Scalar> PenalizedObjective<T> {
    pub fn new(
        labels: &[u8],
        bgf: Option<BoxedObjective<T>>,
        wgf: Option<BoxedObjective<T>>,
        lambda: T,
        eta: T,
    ) -> Self {
        Self {
            loss: CrossEntropy::new(labels),
            bgf,
            wgf,
            lambda,
            eta,
        }
    }

    pub fn build(
        spec: &PenaltySpec,
        reference: &ReferenceModel<T>,
        train: &Dataset<T>,
        seed: u64,
    ) -> Result<Self> {
        spec.validate()?;
        let bgf = bgf_objective(spec.bgf, train.sensitive(), train.labels())?;
        let wgf = wgf_objective(spec, reference, train.sensitive(), train.labels(), seed)?;
        Ok(Self::new(
            train.labels(),
            bgf,
            wgf,
            T::lit(spec.lambda),
            T::lit(spec.eta),
        ))
    }

    /// Evaluates every term, including zero-weight ones, without a gradient.
    pub fn parts(&self, scores: &[T]) -> Result<ObjectiveParts<T>> {
        let mut scratch = vec![T::zero(); scores.len()];
        let loss = self.loss.evaluate_checked(scores, &mut scratch)?;
        let bgf = self
            .bgf
            .as_ref()
            .map(|b| b.evaluate_checked(scores, &mut scratch))
            .transpose()?;
        let wgf = self
            .wgf
            .as_ref()
            .map(|w| w.evaluate_checked(scores, &mut scratch))
            .transpose()?;
        let total = loss
            + bgf.map_or(T::zero(), |b| self.lambda * b)
            + wgf.map_or(T::zero(), |w| self.eta * w);
        Ok(ObjectiveParts {
            loss,
            bgf,
            wgf,
            total,
        })
    }

    /// Value and score gradient; names the first term that turns non-finite.
    pub fn evaluate_total(&self, scores: &[T], grad: &mut [T]) -> Result<T> {
        let mut total = self.loss.evaluate_checked(scores, grad)?;
        let mut scratch = Vec::new();
        for (term, weight) in [(&self.bgf, self.lambda), (&self.wgf, self.eta)] {
            let Some(term) = term else { continue };
            if weight == T::zero() {
                continue;
            }
            scratch.resize(scores.len(), T::zero());
            total += weight * term.evaluate_checked(scores, &mut scratch)?;
            for (g, &s) in grad.iter_mut().zip(&scratch) {
                *g += weight * s;
            }
        }
        Ok(total)
    }
}

impl<T: Scalar> ScoreObjective<T> for PenalizedObjective<T> {
    fn name(&self) -> String {
        let mut s = self.loss.name();
        if let Some(b) = &self.bgf {
            s.push_str(&format!(" + lambda*{}", b.name()));
        }
        if let Some(w) = &self.wgf {
            s.push_str(&format!(" + eta*{}", w.name()));
        }
        s
    }

    fn evaluate(&self, scores: &[T], grad: &mut [T]) -> T {
        self.evaluate_total(scores, grad)
            .unwrap_or_else(|_| T::nan())
    }

    fn evaluate_checked(&self, scores: &[T], grad: &mut [T]) -> Result<T> {
        self.evaluate_total(scores, grad)
    }
}
