use std::cmp::Ordering;
use std::path::PathBuf;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    bgf_of, train_constrained, wgf_badness, wgf_of, write_json, OptimizerConfig, RunResult,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::penalties::{PenaltySpec, ReferenceModel};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub lambdas: Vec<f64>,
    pub etas: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            lambdas: vec![0.0, 0.05, 0.1, 0.35, 0.45, 0.6, 0.75, 1.0, 2.0, 5.0],
            etas: vec![0.0, 0.1, 0.5, 1.0, 3.0, 5.0],
        }
    }
}

impl SweepGrid {
    pub fn single(lambda: f64, eta: f64) -> Self {
        Self {
            lambdas: vec![lambda],
            etas: vec![eta],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambdas", &self.lambdas), ("etas", &self.etas)] {
            if v.is_empty() {
                return Err(Error::Config(format!("sweep {name} must not be empty")));
            }
            if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::Config(format!(
                    "sweep {name} must be finite and non-negative"
                )));
            }
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!(
                    "sweep {name} must be strictly ascending"
                )));
            }
        }
        Ok(())
    }

    /// `(lambda, eta)` pairs, lambda-major.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        self.lambdas
            .iter()
            .flat_map(|&l| self.etas.iter().map(move |&e| (l, e)))
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 means one.
    pub jobs: usize,
    /// Finished cells are stored here and reused when a sweep is rerun.
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell<T> {
    pub lambda: f64,
    pub eta: f64,
    /// Exact metrics on the test split.
    pub bgf_exact: Option<T>,
    pub wgf_exact: T,
    /// Surrogates on the training split at the last epoch.
    pub bgf_surr: Option<T>,
    pub wgf_surr: Option<T>,
    pub result: RunResult<T>,
}

impl<T: Scalar> SweepCell<T> {
    fn new(lambda: f64, eta: f64, result: RunResult<T>) -> Self {
        let last = result.loss_trace.last().copied();
        Self {
            lambda,
            eta,
            bgf_exact: bgf_of(&result.report_test, result.spec.bgf.metric()),
            wgf_exact: wgf_of(&result.report_test, result.spec.wgf.metric()),
            bgf_surr: last.and_then(|p| p.bgf_surr),
            wgf_surr: last.and_then(|p| p.wgf_surr),
            result,
        }
    }

    fn badness(&self) -> T {
        wgf_badness(&self.result.report_test, self.result.spec.wgf.metric())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome<T> {
    pub cells: Vec<SweepCell<T>>,
    pub selected: usize,
    /// False when no cell met the between-group target.
    pub feasible: bool,
}

impl<T> SweepOutcome<T> {
    pub fn selected(&self) -> &SweepCell<T> {
        &self.cells[self.selected]
    }
}

fn cmp<T: Scalar>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Among cells whose exact test BGF is at most `epsilon`, the one with the
/// smallest within-group unfairness; ties go to higher accuracy, then smaller
/// eta, then smaller lambda. Without such a cell, the cell with the smallest
/// BGF is returned with `false`.
pub fn select<T: Scalar>(cells: &[SweepCell<T>], epsilon: f64) -> (usize, bool) {
    let eps = T::lit(epsilon);
    let bgf = |c: &SweepCell<T>| c.bgf_exact.unwrap_or_else(T::infinity);
    let tiebreak = |a: &SweepCell<T>, b: &SweepCell<T>| {
        cmp(b.result.report_test.acc, a.result.report_test.acc)
            .then(a.eta.total_cmp(&b.eta))
            .then(a.lambda.total_cmp(&b.lambda))
    };
    let feasible: Vec<usize> = (0..cells.len())
        .filter(|&i| bgf(&cells[i]) <= eps)
        .collect();
    if let Some(&best) = feasible.iter().min_by(|&&a, &&b| {
        cmp(cells[a].badness(), cells[b].badness()).then(tiebreak(&cells[a], &cells[b]))
    }) {
        return (best, true);
    }
    let best = (0..cells.len())
        .min_by(|&a, &b| cmp(bgf(&cells[a]), bgf(&cells[b])).then(tiebreak(&cells[a], &cells[b])))
        .expect("non-empty grid");
    (best, false)
}

fn cell_path(dir: &std::path::Path, lambda: f64, eta: f64) -> PathBuf {
    dir.join(format!("cell_lambda{lambda}_eta{eta}.json"))
}

fn cached<T: Scalar>(
    path: &std::path::Path,
    spec: &PenaltySpec,
    opt: &OptimizerConfig,
) -> Option<RunResult<T>> {
    let text = std::fs::read_to_string(path).ok()?;
    let r: RunResult<T> = serde_json::from_str(&text).ok()?;
    (r.spec == *spec && r.opt == *opt).then_some(r)
}

/// Trains every grid cell with `base`'s penalty kinds and targets.
#[allow(clippy::too_many_arguments)]
pub fn sweep<T: Scalar>(
    kind: ModelKind,
    train: &Dataset<T>,
    test: &Dataset<T>,
    reference: &ReferenceModel<T>,
    grid: &SweepGrid,
    base: &PenaltySpec,
    opt: &OptimizerConfig,
    options: &SweepOptions,
) -> Result<SweepOutcome<T>> {
    grid.validate()?;
    base.validate()?;
    if let Some(dir) = &options.cache_dir {
        std::fs::create_dir_all(dir)?;
    }
    let run_cell = |&(lambda, eta): &(f64, f64)| -> Result<SweepCell<T>> {
        let spec = base.with_weights(lambda, eta);
        let path = options
            .cache_dir
            .as_ref()
            .map(|d| cell_path(d, lambda, eta));
        if let Some(r) = path.as_ref().and_then(|p| cached(p, &spec, opt)) {
            info!("reusing cell lambda={lambda} eta={eta}");
            return Ok(SweepCell::new(lambda, eta, r));
        }
        let result = train_constrained(kind, train, test, reference, &spec, opt)?;
        info!(
            "cell lambda={lambda} eta={eta}: test acc {:.4}",
            result.report_test.acc
        );
        if let Some(p) = &path {
            write_json(p, &result)?;
        }
        Ok(SweepCell::new(lambda, eta, result))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let cells: Vec<SweepCell<T>> = pool.install(|| {
        grid.cells()
            .par_iter()
            .map(run_cell)
            .collect::<Result<Vec<_>>>()
    })?;
    let (selected, feasible) = select(&cells, base.epsilon);
    Ok(SweepOutcome {
        cells,
        selected,
        feasible,
    })
}
