//! Two-by-two tables of reference prediction versus model prediction, per group.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `counts[z][i][j]` is the number of rows in group `z` with reference
/// prediction `i` and model prediction `j`. `by_label[z][y][i][j]` further
/// splits the rows by their true label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossTable {
    pub counts: [[[u64; 2]; 2]; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by_label: Option<[[[[u64; 2]; 2]; 2]; 2]>,
}

/// Which group a directional constraint expects to gain positive predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// The reference classifier favours group 1, so group 0 should be raised.
    RaiseGroup0,
    RaiseGroup1,
}

impl Direction {
    /// From reference positive rates per group; ties keep the conventional direction.
    pub fn from_rates(rate0: Ratio<u64>, rate1: Ratio<u64>) -> Self {
        if rate0 <= rate1 {
            Direction::RaiseGroup0
        } else {
            Direction::RaiseGroup1
        }
    }

    /// `(raised, lowered)` group indices.
    pub fn groups(self) -> (usize, usize) {
        match self {
            Direction::RaiseGroup0 => (0, 1),
            Direction::RaiseGroup1 => (1, 0),
        }
    }
}

fn ratio(num: u64, den: u64) -> Ratio<u64> {
    if den == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(num, den)
    }
}

pub fn to_scalar<T: Scalar>(r: Ratio<u64>) -> T {
    T::lit(*r.numer() as f64 / *r.denom() as f64)
}

impl CrossTable {
    pub fn from_counts(counts: [[[u64; 2]; 2]; 2]) -> Self {
        Self {
            counts,
            by_label: None,
        }
    }

    pub fn group_total(&self, z: usize) -> u64 {
        self.counts[z].iter().flatten().sum()
    }

    /// `a_{ij|z}`
    pub fn rate(&self, z: usize, i: usize, j: usize) -> Ratio<u64> {
        ratio(self.counts[z][i][j], self.group_total(z))
    }

    pub fn stratum_total(&self, z: usize, y: usize) -> Option<u64> {
        self.by_label.map(|t| t[z][y].iter().flatten().sum())
    }

    /// `a_{ij|zy}`; zero for an empty stratum.
    pub fn rate_by_label(&self, z: usize, y: usize, i: usize, j: usize) -> Option<Ratio<u64>> {
        let t = self.by_label?;
        Some(ratio(t[z][y][i][j], self.stratum_total(z, y)?))
    }

    /// Reference positive rate `Pr(C* = 1 | Z = z)`.
    pub fn reference_rate(&self, z: usize) -> Ratio<u64> {
        ratio(self.counts[z][1].iter().sum(), self.group_total(z))
    }

    pub fn direction(&self) -> Direction {
        Direction::from_rates(self.reference_rate(0), self.reference_rate(1))
    }

    /// Direction among positive-label rows.
    pub fn eop_direction(&self) -> Option<Direction> {
        let t = self.by_label?;
        let rate = |z: usize| {
            ratio(
                t[z][1][1].iter().sum(),
                self.stratum_total(z, 1).unwrap_or(0),
            )
        };
        Some(Direction::from_rates(rate(0), rate(1)))
    }

    /// Text rendering in the per-group panel layout.
    #[allow(clippy::needless_range_loop)]
    pub fn render(&self) -> String {
        let c = &self.counts;
        let mut s = String::new();
        s.push_str("            Z=0                    Z=1\n");
        s.push_str("        Yhat=0   Yhat=1        Yhat=0   Yhat=1\n");
        for i in 0..2 {
            s.push_str(&format!(
                "Y*={i}  {:>8} {:>8}      {:>8} {:>8}\n",
                c[0][i][0], c[0][i][1], c[1][i][0], c[1][i][1]
            ));
        }
        s
    }
}

/// Tabulates reference predictions against model predictions.
pub fn cross_table(
    fstar_preds: &[u8],
    f_preds: &[u8],
    sensitive: &[u8],
    labels: Option<&[u8]>,
) -> Result<CrossTable> {
    let n = fstar_preds.len();
    if f_preds.len() != n || sensitive.len() != n || labels.is_some_and(|l| l.len() != n) {
        return Err(Error::Length(
            "cross_table inputs must have equal lengths".into(),
        ));
    }
    let mut counts = [[[0u64; 2]; 2]; 2];
    let mut by_label = labels.map(|_| [[[[0u64; 2]; 2]; 2]; 2]);
    for k in 0..n {
        let (z, i, j) = (
            sensitive[k] as usize,
            fstar_preds[k] as usize,
            f_preds[k] as usize,
        );
        if z > 1 || i > 1 || j > 1 {
            return Err(Error::Schema("cross_table inputs must be 0 or 1".into()));
        }
        counts[z][i][j] += 1;
        if let (Some(t), Some(l)) = (by_label.as_mut(), labels) {
            let y = l[k] as usize;
            if y > 1 {
                return Err(Error::Schema("labels must be 0 or 1".into()));
            }
            t[z][y][i][j] += 1;
        }
    }
    let ct = CrossTable { counts, by_label };
    for z in 0..2 {
        if ct.group_total(z) == 0 {
            return Err(Error::EmptyGroup(format!("group {z} has no rows")));
        }
    }
    Ok(ct)
}

fn max(a: Ratio<u64>, b: Ratio<u64>) -> Ratio<u64> {
    a.max(b)
}

/// `max_z min{a_{01|z}, a_{10|z}}`, exactly.
pub fn wgf_exact(ct: &CrossTable) -> Ratio<u64> {
    (0..2)
        .map(|z| ct.rate(z, 0, 1).min(ct.rate(z, 1, 0)))
        .fold(Ratio::from_integer(0), max)
}

/// `max{a_{10|u}, a_{01|v}}` with `u` the group the reference classifier
/// under-serves and `v` the other one.
pub fn dwgf_di_exact(ct: &CrossTable) -> Ratio<u64> {
    let (u, v) = ct.direction().groups();
    max(ct.rate(u, 1, 0), ct.rate(v, 0, 1))
}

/// Directional term among positive-label rows combined with the undirected
/// term among negative-label rows.
pub fn dwgf_eop_exact(ct: &CrossTable) -> Result<Ratio<u64>> {
    let missing =
        || Error::Undefined("equal-opportunity dWGF needs a label-stratified cross table".into());
    let (u, v) = ct.eop_direction().ok_or_else(missing)?.groups();
    let r = |z, y, i, j| ct.rate_by_label(z, y, i, j).expect("stratified");
    let directed = max(r(u, 1, 1, 0), r(v, 1, 0, 1));
    let undirected = (0..2)
        .map(|z| r(z, 0, 1, 0).min(r(z, 0, 0, 1)))
        .fold(Ratio::from_integer(0), max);
    Ok(max(directed, undirected))
}

pub fn wgf_value<T: Scalar>(ct: &CrossTable) -> T {
    to_scalar(wgf_exact(ct))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DwgfTarget {
    Di,
    Eop,
}

pub fn dwgf_value<T: Scalar>(ct: &CrossTable, target: DwgfTarget) -> Result<T> {
    Ok(to_scalar(match target {
        DwgfTarget::Di => dwgf_di_exact(ct),
        DwgfTarget::Eop => dwgf_eop_exact(ct)?,
    }))
}
