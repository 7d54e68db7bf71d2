use log::warn;
use num_rational::Ratio;

use super::{hinge, hinge_slope, WgfKind};
use crate::error::{Error, Result};
use crate::metrics::Direction;
use crate::models::ScoreObjective;
use crate::scalar::Scalar;

/// A max/min expression over weighted hinge sums. Only the active branch of
/// each max or min receives gradient.
#[derive(Debug, Clone)]
enum Node<T> {
    /// `sum_i coef * hinge(sign_i * s_i)`
    Leaf(Vec<(usize, T, T)>),
    Max(Vec<Node<T>>),
    Min(Vec<Node<T>>),
}

impl<T: Scalar> Node<T> {
    fn value(&self, s: &[T]) -> T {
        match self {
            Node::Leaf(rows) => rows
                .iter()
                .map(|&(i, c, sign)| c * hinge(sign * s[i]))
                .sum(),
            Node::Max(kids) | Node::Min(kids) => self
                .active(s)
                .map(|k| kids[k].value(s))
                .unwrap_or_else(T::zero),
        }
    }

    /// Index of the selected child; the first one wins ties.
    fn active(&self, s: &[T]) -> Option<usize> {
        let (kids, want_max) = match self {
            Node::Leaf(_) => return None,
            Node::Max(k) => (k, true),
            Node::Min(k) => (k, false),
        };
        let mut best: Option<(usize, T)> = None;
        for (k, kid) in kids.iter().enumerate() {
            let v = kid.value(s);
            let better = match best {
                None => true,
                Some((_, b)) => (want_max && v > b) || (!want_max && v < b),
            };
            if better {
                best = Some((k, v));
            }
        }
        best.map(|(k, _)| k)
    }

    fn backprop(&self, s: &[T], grad: &mut [T]) {
        match self {
            Node::Leaf(rows) => {
                for &(i, c, sign) in rows {
                    grad[i] += c * hinge_slope(sign * s[i]) * sign;
                }
            }
            Node::Max(kids) | Node::Min(kids) => {
                if let Some(k) = self.active(s) {
                    kids[k].backprop(s, grad);
                }
            }
        }
    }
}

/// Surrogate of the (directional) within-group fairness measure built from
/// reference pseudo-labels `Y* = C*(X)`.
#[derive(Debug, Clone)]
pub struct WgfSurrogate<T> {
    name: String,
    root: Node<T>,
}

/// Rows of group `z` (and label `y` when stratified) split by pseudo-label.
struct Stratum {
    ones: Vec<usize>,
    zeros: Vec<usize>,
    size: usize,
}

fn stratum(preds: &[u8], sensitive: &[u8], labels: Option<(&[u8], u8)>, z: u8) -> Stratum {
    let mut s = Stratum {
        ones: Vec::new(),
        zeros: Vec::new(),
        size: 0,
    };
    for i in 0..preds.len() {
        if sensitive[i] != z || labels.is_some_and(|(l, y)| l[i] != y) {
            continue;
        }
        s.size += 1;
        if preds[i] == 1 {
            s.ones.push(i);
        } else {
            s.zeros.push(i);
        }
    }
    s
}

impl Stratum {
    fn rate(&self) -> Ratio<u64> {
        if self.size == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(self.ones.len() as u64, self.size as u64)
        }
    }

    /// Bound on the share of the stratum with `Y* = 1` but a non-positive score.
    fn lost<T: Scalar>(&self, label: &str) -> Option<Node<T>> {
        self.leaf(&self.ones, -T::one(), label, "Y*=1")
    }

    /// Bound on the share of the stratum with `Y* = 0` but a positive score.
    fn gained<T: Scalar>(&self, label: &str) -> Option<Node<T>> {
        self.leaf(&self.zeros, T::one(), label, "Y*=0")
    }

    fn leaf<T: Scalar>(
        &self,
        rows: &[usize],
        sign: T,
        label: &str,
        which: &str,
    ) -> Option<Node<T>> {
        if rows.is_empty() {
            warn!("{label}: no {which} rows, branch dropped");
            return None;
        }
        let c = T::one() / T::from_usize_lossy(self.size);
        Some(Node::Leaf(rows.iter().map(|&i| (i, c, sign)).collect()))
    }

    fn undirected<T: Scalar>(&self, label: &str) -> Node<T> {
        Node::Min(
            [self.lost(label), self.gained(label)]
                .into_iter()
                .flatten()
                .collect(),
        )
    }
}

impl<T: Scalar> WgfSurrogate<T> {
    /// `fstar_preds` are the reference classifier's predictions on the same
    /// rows; the direction of directed variants is read off them. Returns
    /// `None` for [`WgfKind::None`]; [`WgfKind::Kendall`] is built by
    /// [`super::KendallSurrogate`].
    pub fn new(
        kind: WgfKind,
        fstar_preds: &[u8],
        sensitive: &[u8],
        labels: &[u8],
    ) -> Result<Option<Self>> {
        if fstar_preds.len() != sensitive.len() || labels.len() != sensitive.len() {
            return Err(Error::Length(
                "reference predictions, groups and labels differ in length".into(),
            ));
        }
        let groups = |labels: Option<(&[u8], u8)>| {
            [0, 1].map(|z| stratum(fstar_preds, sensitive, labels, z))
        };
        let root = match kind {
            WgfKind::None => return Ok(None),
            WgfKind::Kendall => {
                return Err(Error::Config(
                    "kendall is not a classifier surrogate".into(),
                ))
            }
            WgfKind::Undirected => {
                let g = groups(None);
                Node::Max(
                    (0..2)
                        .map(|z| g[z].undirected(&format!("group {z}")))
                        .collect(),
                )
            }
            WgfKind::DirectedDi => {
                let g = groups(None);
                let (u, v) = Direction::from_rates(g[0].rate(), g[1].rate()).groups();
                Node::Max(
                    [
                        g[u].lost(&format!("group {u}")),
                        g[v].gained(&format!("group {v}")),
                    ]
                    .into_iter()
                    .flatten()
                    .collect(),
                )
            }
            WgfKind::DirectedEop => {
                let pos = groups(Some((labels, 1)));
                let neg = groups(Some((labels, 0)));
                let (u, v) = Direction::from_rates(pos[0].rate(), pos[1].rate()).groups();
                let mut kids: Vec<Node<T>> = [
                    pos[u].lost(&format!("group {u}, y=1")),
                    pos[v].gained(&format!("group {v}, y=1")),
                ]
                .into_iter()
                .flatten()
                .collect();
                kids.push(Node::Max(
                    (0..2)
                        .map(|z| neg[z].undirected(&format!("group {z}, y=0")))
                        .collect(),
                ));
                Node::Max(kids)
            }
        };
        Ok(Some(Self {
            name: kind.to_string(),
            root,
        }))
    }
}

impl<T: Scalar> ScoreObjective<T> for WgfSurrogate<T> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn evaluate(&self, scores: &[T], grad: &mut [T]) -> T {
        grad.iter_mut().for_each(|g| *g = T::zero());
        self.root.backprop(scores, grad);
        self.root.value(scores)
    }
}
