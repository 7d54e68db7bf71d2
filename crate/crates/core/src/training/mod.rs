//! Full-batch momentum training of the reference and penalized models, and
//! grid sweeps over the penalty weights.

mod rundir;
mod sweep;

pub use rundir::{
    read_predictions, write_frontier_csv, write_json, write_predictions_csv, write_trace_csv,
    PredictionRow, FRONTIER_COLUMNS, PREDICTION_COLUMNS, TRACE_COLUMNS,
};
pub use sweep::{select, sweep, SweepCell, SweepGrid, SweepOptions, SweepOutcome};

use log::debug;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{
    bgf_metrics, cross_table, dwgf_value, kendall_tau, predictions, wgf_value, DwgfTarget,
    FairnessReport, TauMode,
};
use crate::models::{Design, Model, ModelKind};
use crate::penalties::{BgfMetric, PenalizedObjective, PenaltySpec, ReferenceModel, WgfMetric};
use crate::scalar::Scalar;

fn default_momentum() -> f64 {
    0.9
}

fn default_ridge() -> f64 {
    1e-6
}

fn default_trace_every() -> usize {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    /// Weight of `||theta||^2 / 2`, applied to networks only.
    #[serde(default = "default_ridge")]
    pub ridge: f64,
    #[serde(default)]
    pub seed: u64,
    /// Trace sampling period in epochs.
    #[serde(default = "default_trace_every")]
    pub trace_every: usize,
}

impl OptimizerConfig {
    pub const LEARNING_RATES: [f64; 3] = [0.01, 0.1, 1.0];
    pub const EPOCHS: [usize; 2] = [10_000, 20_000];

    pub fn new(learning_rate: f64, epochs: usize, seed: u64) -> Self {
        Self {
            learning_rate,
            epochs,
            momentum: default_momentum(),
            ridge: default_ridge(),
            seed,
            trace_every: default_trace_every(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::Config(format!(
                "ridge must be non-negative, got {}",
                self.ridge
            )));
        }
        if self.trace_every == 0 {
            return Err(Error::Config("trace_every must be positive".into()));
        }
        Ok(())
    }
}

/// Training-set diagnostics at one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint<T> {
    pub epoch: usize,
    pub loss: T,
    pub bgf_surr: Option<T>,
    pub wgf_surr: Option<T>,
    pub exact_bgf: Option<T>,
    pub exact_wgf: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult<T> {
    pub model: Model<T>,
    pub report_train: FairnessReport<T>,
    pub report_test: FairnessReport<T>,
    pub spec: PenaltySpec,
    pub opt: OptimizerConfig,
    pub loss_trace: Vec<TracePoint<T>>,
}

/// Value of the exact between-group metric a surrogate targets.
pub fn bgf_of<T: Scalar>(r: &FairnessReport<T>, metric: BgfMetric) -> Option<T> {
    match metric {
        BgfMetric::Di => Some(r.di),
        BgfMetric::Me => Some(r.me),
        BgfMetric::Eop => r.eop,
        BgfMetric::Msp => Some(r.msp),
    }
}

/// Within-group unfairness, oriented so that smaller is better: the
/// (directional) WGF value, or `1 - tau_bar` for rankings.
pub fn wgf_badness<T: Scalar>(r: &FairnessReport<T>, metric: WgfMetric) -> T {
    match metric {
        WgfMetric::Wgf => r.wgf,
        WgfMetric::DwgfDi => r.dwgf_di,
        WgfMetric::DwgfEop => r.dwgf_eop,
        WgfMetric::TauBar => T::one() - r.tau_bar,
    }
}

/// Raw value of the within-group metric as reported (`tau_bar` for rankings).
pub fn wgf_of<T: Scalar>(r: &FairnessReport<T>, metric: WgfMetric) -> T {
    match metric {
        WgfMetric::TauBar => r.tau_bar,
        m => wgf_badness(r, m),
    }
}

pub fn exact_bgf<T: Scalar>(
    metric: BgfMetric,
    scores: &[T],
    sensitive: &[u8],
    labels: &[u8],
) -> Result<Option<T>> {
    let m = bgf_metrics(scores, sensitive, labels)?;
    Ok(match metric {
        BgfMetric::Di => Some(m.di),
        BgfMetric::Me => Some(m.me),
        BgfMetric::Eop => m.eop,
        BgfMetric::Msp => Some(m.msp),
    })
}

pub fn exact_wgf<T: Scalar>(
    metric: WgfMetric,
    scores: &[T],
    fstar_scores: &[T],
    sensitive: &[u8],
    labels: &[u8],
) -> Result<T> {
    if metric == WgfMetric::TauBar {
        return Ok(kendall_tau(scores, fstar_scores, sensitive, TauMode::Exact)?.tau_bar);
    }
    let ct = cross_table(
        &predictions(fstar_scores),
        &predictions(scores),
        sensitive,
        Some(labels),
    )?;
    match metric {
        WgfMetric::Wgf => Ok(wgf_value(&ct)),
        WgfMetric::DwgfDi => dwgf_value(&ct, DwgfTarget::Di),
        _ => dwgf_value(&ct, DwgfTarget::Eop),
    }
}

struct Tracer<'a, T> {
    spec: &'a PenaltySpec,
    fstar_scores: &'a [T],
    sensitive: &'a [u8],
    labels: &'a [u8],
}

impl<T: Scalar> Tracer<'_, T> {
    fn point(
        &self,
        epoch: usize,
        scores: &[T],
        objective: &PenalizedObjective<T>,
    ) -> Result<TracePoint<T>> {
        let parts = objective.parts(scores).map_err(|e| diverged(e, epoch))?;
        Ok(TracePoint {
            epoch,
            loss: parts.loss,
            bgf_surr: parts.bgf,
            wgf_surr: parts.wgf,
            exact_bgf: exact_bgf(self.spec.bgf.metric(), scores, self.sensitive, self.labels)?,
            exact_wgf: Some(exact_wgf(
                self.spec.wgf.metric(),
                scores,
                self.fstar_scores,
                self.sensitive,
                self.labels,
            )?),
        })
    }
}

fn diverged(e: Error, epoch: usize) -> Error {
    match e {
        Error::NonFinite { term } => Error::Diverged { epoch, term },
        other => other,
    }
}

/// Heavy-ball descent `v <- mu v - lr g; theta <- theta + v` from `model`.
fn fit<T: Scalar>(
    mut model: Model<T>,
    design: &Design<T>,
    objective: &PenalizedObjective<T>,
    opt: &OptimizerConfig,
    tracer: Option<&Tracer<'_, T>>,
) -> Result<(Model<T>, Vec<TracePoint<T>>)> {
    opt.validate()?;
    let lr = T::lit(opt.learning_rate);
    let mu = T::lit(opt.momentum);
    let ridge = if model.kind() == ModelKind::Mlp {
        T::lit(opt.ridge)
    } else {
        T::zero()
    };
    let mut velocity = vec![T::zero(); model.params().len()];
    let mut trace = Vec::new();
    for epoch in 0..opt.epochs {
        let mut bundle = model
            .objective_gradient_design(objective, design)
            .map_err(|e| diverged(e, epoch))?;
        if let Some(t) = tracer {
            if epoch % opt.trace_every == 0 {
                trace.push(t.point(epoch, &bundle.scores, objective)?);
            }
        }
        if ridge != T::zero() {
            for (g, &w) in bundle.grad.iter_mut().zip(model.params()) {
                *g += ridge * w;
            }
        }
        for ((w, v), &g) in model
            .params_mut()
            .iter_mut()
            .zip(&mut velocity)
            .zip(&bundle.grad)
        {
            *v = mu * *v - lr * g;
            *w += *v;
        }
        if model.params().iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged {
                epoch,
                term: "parameters".into(),
            });
        }
        if epoch % 1000 == 0 {
            debug!("epoch {epoch}: objective {}", bundle.value);
        }
    }
    if let Some(t) = tracer {
        let scores = model.scores(design)?;
        trace.push(t.point(opt.epochs, &scores, objective)?);
    }
    Ok((model, trace))
}

/// Minimizes the mean cross-entropy; the result serves as the reference model.
pub fn train_unconstrained<T: Scalar>(
    kind: ModelKind,
    train: &Dataset<T>,
    opt: &OptimizerConfig,
) -> Result<Model<T>> {
    let init = Model::init(kind, train.p(), opt.seed)?;
    let objective = PenalizedObjective::new(train.labels(), None, None, T::zero(), T::zero());
    Ok(fit(init, &Design::new(train.features()), &objective, opt, None)?.0)
}

/// Minimizes `loss + lambda * bgf + eta * wgf` and returns the model with its
/// training trace. The reference must be bound to `train`.
pub fn train_constrained_model<T: Scalar>(
    kind: ModelKind,
    train: &Dataset<T>,
    reference: &ReferenceModel<T>,
    spec: &PenaltySpec,
    opt: &OptimizerConfig,
) -> Result<(Model<T>, Vec<TracePoint<T>>)> {
    spec.validate()?;
    let objective = PenalizedObjective::build(spec, reference, train, opt.seed)?;
    let tracer = Tracer {
        spec,
        fstar_scores: &reference.fstar_scores,
        sensitive: train.sensitive(),
        labels: train.labels(),
    };
    let init = Model::init(kind, train.p(), opt.seed)?;
    fit(
        init,
        &Design::new(train.features()),
        &objective,
        opt,
        Some(&tracer),
    )
}

/// [`train_constrained_model`] followed by exact reports on both splits.
pub fn train_constrained<T: Scalar>(
    kind: ModelKind,
    train: &Dataset<T>,
    test: &Dataset<T>,
    reference: &ReferenceModel<T>,
    spec: &PenaltySpec,
    opt: &OptimizerConfig,
) -> Result<RunResult<T>> {
    let (model, loss_trace) = train_constrained_model(kind, train, reference, spec, opt)?;
    let report_train = report(&model, &reference.fstar, train)?;
    let report_test = report(&model, &reference.fstar, test)?;
    Ok(RunResult {
        model,
        report_train,
        report_test,
        spec: *spec,
        opt: *opt,
        loss_trace,
    })
}

/// Exact metrics of `model` against `fstar` on `ds`.
pub fn report<T: Scalar>(
    model: &Model<T>,
    fstar: &Model<T>,
    ds: &Dataset<T>,
) -> Result<FairnessReport<T>> {
    FairnessReport::compute(
        &model.scores_on(ds)?,
        &fstar.scores_on(ds)?,
        ds.sensitive(),
        ds.labels(),
    )
}
