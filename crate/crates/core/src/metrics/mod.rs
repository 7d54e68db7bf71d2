//! Exact (non-surrogate) accuracy and fairness statistics.

mod bgf;
mod crosstab;
mod kendall;

pub use bgf::{accuracy_metrics, auc_exact, bgf_metrics, AccuracyMetrics, BgfMetrics};
pub use crosstab::{
    cross_table, dwgf_di_exact, dwgf_eop_exact, dwgf_value, to_scalar, wgf_exact, wgf_value,
    CrossTable, Direction, DwgfTarget,
};
pub use kendall::{concordant_pairs, kendall_tau, KendallTau, TauMode};

pub(crate) use kendall::sample_pair;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Scalar;

pub fn predictions<T: Scalar>(scores: &[T]) -> Vec<u8> {
    scores.iter().map(|&s| (s > T::zero()) as u8).collect()
}

/// Every exact metric of one model against its reference on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport<T> {
    pub n: usize,
    pub acc: T,
    pub di: T,
    pub me: T,
    pub eop: Option<T>,
    pub msp: T,
    pub wgf: T,
    pub dwgf_di: T,
    pub dwgf_eop: T,
    pub tau_per_group: [T; 2],
    pub tau_bar: T,
    pub bce: T,
    pub auc: Option<T>,
    pub cross_tables: CrossTable,
}

pub const REPORT_CSV_COLUMNS: [&str; 14] = [
    "n", "acc", "di", "me", "eop", "msp", "wgf", "dwgf_di", "dwgf_eop", "tau_0", "tau_1",
    "tau_bar", "bce", "auc",
];

impl<T: Scalar> FairnessReport<T> {
    /// `fstar_scores` are the reference model's scores on the same rows.
    pub fn compute(
        scores: &[T],
        fstar_scores: &[T],
        sensitive: &[u8],
        labels: &[u8],
    ) -> Result<Self> {
        let bgf = bgf_metrics(scores, sensitive, labels)?;
        let acc = accuracy_metrics(scores, labels)?;
        let ct = cross_table(
            &predictions(fstar_scores),
            &predictions(scores),
            sensitive,
            Some(labels),
        )?;
        let tau = kendall_tau(scores, fstar_scores, sensitive, TauMode::Exact)?;
        Ok(Self {
            n: scores.len(),
            acc: acc.acc,
            di: bgf.di,
            me: bgf.me,
            eop: bgf.eop,
            msp: bgf.msp,
            wgf: wgf_value(&ct),
            dwgf_di: dwgf_value(&ct, DwgfTarget::Di)?,
            dwgf_eop: dwgf_value(&ct, DwgfTarget::Eop)?,
            tau_per_group: tau.tau,
            tau_bar: tau.tau_bar,
            bce: acc.bce,
            auc: acc.auc,
            cross_tables: ct,
        })
    }

    pub fn csv_header() -> String {
        REPORT_CSV_COLUMNS.join(",")
    }

    /// One CSV row in [`REPORT_CSV_COLUMNS`] order; undefined values are empty.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<T>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.n.to_string(),
            self.acc.to_string(),
            self.di.to_string(),
            self.me.to_string(),
            opt(self.eop),
            self.msp.to_string(),
            self.wgf.to_string(),
            self.dwgf_di.to_string(),
            self.dwgf_eop.to_string(),
            self.tau_per_group[0].to_string(),
            self.tau_per_group[1].to_string(),
            self.tau_bar.to_string(),
            self.bce.to_string(),
            opt(self.auc),
        ]
        .join(",")
    }
}
