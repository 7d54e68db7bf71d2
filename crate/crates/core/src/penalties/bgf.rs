use super::{hinge, hinge_slope, BgfKind};
use crate::error::{Error, Result};
use crate::models::ScoreObjective;
use crate::scalar::{sign0, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Link {
    Hinge,
    Sigmoid,
    Identity,
}

/// `factor * |mean_{plus} h(sign_i * s_i) - mean_{minus} h(sign_i * s_i)|`
/// over two fixed row sets.
#[derive(Debug, Clone)]
pub struct GroupGap<T> {
    name: String,
    link: Link,
    /// `(row, side, sign)` with side 0 the plus set.
    rows: Vec<(usize, usize, T)>,
    /// `factor / set size` per side.
    scale: [T; 2],
}

impl<T: Scalar> GroupGap<T> {
    /// Returns `None` for [`BgfKind::None`].
    pub fn new(kind: BgfKind, sensitive: &[u8], labels: &[u8]) -> Result<Option<Self>> {
        if sensitive.len() != labels.len() {
            return Err(Error::Length(
                "sensitive and label vectors differ in length".into(),
            ));
        }
        let (link, positives_only) = match kind {
            BgfKind::None => return Ok(None),
            BgfKind::HingeDi | BgfKind::HingeMe => (Link::Hinge, false),
            BgfKind::HingeEop => (Link::Hinge, true),
            BgfKind::CovDi => (Link::Identity, false),
            BgfKind::FnncDi | BgfKind::Msp => (Link::Sigmoid, false),
            BgfKind::FnncEop => (Link::Sigmoid, true),
        };
        let keep = |i: usize| !positives_only || labels[i] == 1;
        let mut size = [0usize; 2];
        for i in (0..sensitive.len()).filter(|&i| keep(i)) {
            size[sensitive[i] as usize] += 1;
        }
        if let Some(z) = (0..2).find(|&z| size[z] == 0) {
            let what = if positives_only {
                "positive-label rows"
            } else {
                "rows"
            };
            return Err(Error::EmptyGroup(format!(
                "{kind} needs {what} in group {z}"
            )));
        }
        // the error-rate gap is group 0 minus group 1, all others group 1 minus group 0
        let plus = if kind == BgfKind::HingeMe { 0 } else { 1 };
        let factor = if kind == BgfKind::CovDi {
            // sample covariance of z and the score: n0 n1 / (n (n - 1)) times the mean gap
            let n = (size[0] + size[1]) as f64;
            T::lit(size[0] as f64 * size[1] as f64 / (n * (n - 1.0)))
        } else {
            T::one()
        };
        let side = |z: usize| usize::from(z != plus);
        let mut scale = [T::zero(); 2];
        for z in 0..2 {
            scale[side(z)] = factor / T::from_usize_lossy(size[z]);
        }
        let rows = (0..sensitive.len())
            .filter(|&i| keep(i))
            .map(|i| {
                let sign = if kind == BgfKind::HingeMe && labels[i] == 1 {
                    -T::one()
                } else {
                    T::one()
                };
                (i, side(sensitive[i] as usize), sign)
            })
            .collect();
        Ok(Some(Self {
            name: kind.to_string(),
            link,
            rows,
            scale,
        }))
    }

    fn link(&self, t: T) -> (T, T) {
        match self.link {
            Link::Hinge => (hinge(t), hinge_slope(t)),
            Link::Sigmoid => {
                let p = t.sigmoid();
                (p, p * (T::one() - p))
            }
            Link::Identity => (t, T::one()),
        }
    }
}

impl<T: Scalar> ScoreObjective<T> for GroupGap<T> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn evaluate(&self, scores: &[T], grad: &mut [T]) -> T {
        grad.iter_mut().for_each(|g| *g = T::zero());
        let mut sums = [T::zero(); 2];
        for &(i, side, sign) in &self.rows {
            sums[side] += self.link(sign * scores[i]).0;
        }
        let gap = sums[0] * self.scale[0] - sums[1] * self.scale[1];
        let outer = sign0(gap);
        if outer != T::zero() {
            for &(i, side, sign) in &self.rows {
                let w = if side == 0 {
                    self.scale[0]
                } else {
                    -self.scale[1]
                };
                grad[i] = outer * w * self.link(sign * scores[i]).1 * sign;
            }
        }
        gap.abs()
    }
}
