use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use log::{info, warn};
use serde::{Deserialize, Serialize};
use wgf::data::{save_interchange, split, Dataset};
use wgf::metrics::FairnessReport;
use wgf::models::{Model, ModelKind};
use wgf::penalties::{BgfMetric, PenaltySpec, ReferenceModel, WgfMetric};
use wgf::repair::{fit_quantile_repair, massage};
use wgf::training::{
    bgf_of, read_predictions, report, sweep, train_constrained, train_unconstrained, wgf_badness,
    write_frontier_csv, write_json, write_predictions_csv, write_trace_csv, RunResult,
    SweepOptions,
};

use crate::config::RunConfig;

pub const HIDDEN_ACTIVATION: &str = "relu";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub lambda: f64,
    pub eta: f64,
    pub cells: usize,
    /// Whether any cell met the between-group target.
    pub any_cell_feasible: bool,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model_kind: ModelKind,
    pub hidden_activation: String,
    pub penalty: PenaltySpec,
    pub bgf_metric: BgfMetric,
    pub wgf_metric: WgfMetric,
    /// Test BGF within epsilon and WGF badness within delta.
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<Selection>,
    pub reference_test: FairnessReport<f64>,
    pub train: FairnessReport<f64>,
    pub test: FairnessReport<f64>,
}

struct Stage {
    train: Dataset<f64>,
    test: Dataset<f64>,
    reference: ReferenceModel<f64>,
}

fn prepare(cfg: &RunConfig) -> anyhow::Result<Stage> {
    let ds = cfg.load_dataset()?;
    info!(
        "loaded {} rows with {} features from `{}`",
        ds.n(),
        ds.p(),
        ds.name()
    );
    let (train, test) = split(&ds, &cfg.split, cfg.repeat)?;
    info!("split: {} train rows, {} test rows", train.n(), test.n());
    let fstar = train_unconstrained(cfg.model_kind, &train, cfg.reference_optimizer())?;
    let reference = ReferenceModel::new(fstar, &train)?;
    Ok(Stage {
        train,
        test,
        reference,
    })
}

fn start_run_dir(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&dir.join("config.json"), cfg)?;
    Ok(dir)
}

fn feasible(spec: &PenaltySpec, test: &FairnessReport<f64>) -> bool {
    let bgf_ok = bgf_of(test, spec.bgf.metric()).is_none_or(|b| b <= spec.epsilon);
    bgf_ok && wgf_badness(test, spec.wgf.metric()) <= spec.delta
}

fn write_run(
    dir: &Path,
    stage: &Stage,
    result: &RunResult<f64>,
    selection: Option<Selection>,
) -> anyhow::Result<RunReport> {
    let fstar = &stage.reference.fstar;
    write_json(&dir.join("checkpoint.json"), &result.model)?;
    write_json(&dir.join("reference.json"), fstar)?;
    write_trace_csv(&dir.join("trace.csv"), &result.loss_trace)?;
    let scores = result.model.scores_on(&stage.test)?;
    let fstar_scores = fstar.scores_on(&stage.test)?;
    write_predictions_csv(
        &dir.join("predictions.csv"),
        &scores,
        &fstar_scores,
        stage.test.sensitive(),
        stage.test.labels(),
    )?;
    let spec = result.spec;
    let mut ok = feasible(&spec, &result.report_test);
    if let Some(s) = &selection {
        ok &= s.any_cell_feasible;
    }
    let rep = RunReport {
        model_kind: result.model.kind(),
        hidden_activation: HIDDEN_ACTIVATION.into(),
        bgf_metric: spec.bgf.metric(),
        wgf_metric: spec.wgf.metric(),
        penalty: spec,
        feasible: ok,
        selection,
        reference_test: report(fstar, fstar, &stage.test)?,
        train: result.report_train.clone(),
        test: result.report_test.clone(),
    };
    write_json(&dir.join("report.json"), &rep)?;
    Ok(rep)
}

fn summarize(rep: &RunReport) -> Outcome {
    let t = &rep.test;
    info!(
        "test: acc {:.4}, DI {:.4}, ME {:.4}, MSP {:.4}, WGF {:.4}, dWGF(DI) {:.4}, tau {:.4}",
        t.acc, t.di, t.me, t.msp, t.wgf, t.dwgf_di, t.tau_bar
    );
    if rep.feasible {
        Outcome::Feasible
    } else {
        warn!(
            "the run misses its fairness targets (epsilon {}, delta {})",
            rep.penalty.epsilon, rep.penalty.delta
        );
        Outcome::Infeasible
    }
}

pub fn train(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let dir = start_run_dir(cfg)?;
    let stage = prepare(cfg)?;
    let result = train_constrained(
        cfg.model_kind,
        &stage.train,
        &stage.test,
        &stage.reference,
        &cfg.penalty,
        &cfg.optimizer,
    )?;
    let rep = write_run(&dir, &stage, &result, None)?;
    info!("wrote run directory {}", dir.display());
    Ok(summarize(&rep))
}

pub fn sweep_grid(cfg: &RunConfig, jobs: usize) -> anyhow::Result<Outcome> {
    let dir = start_run_dir(cfg)?;
    let stage = prepare(cfg)?;
    let grid = cfg.sweep.clone().unwrap_or_default();
    let options = SweepOptions {
        jobs,
        cache_dir: Some(dir.join("cells")),
    };
    let out = sweep(
        cfg.model_kind,
        &stage.train,
        &stage.test,
        &stage.reference,
        &grid,
        &cfg.penalty,
        &cfg.optimizer,
        &options,
    )?;
    write_frontier_csv(&dir.join("frontier.csv"), &out.cells)?;
    let cell = out.selected();
    info!(
        "selected lambda {}, eta {} out of {} cells",
        cell.lambda,
        cell.eta,
        out.cells.len()
    );
    let selection = Selection {
        lambda: cell.lambda,
        eta: cell.eta,
        cells: out.cells.len(),
        any_cell_feasible: out.feasible,
    };
    let rep = write_run(&dir, &stage, &cell.result, Some(selection))?;
    info!("wrote run directory {}", dir.display());
    Ok(summarize(&rep))
}

/// Metrics of an external predictions file; the report is printed as JSON.
pub fn audit(
    predictions: &Path,
    sensitive_col: &str,
    label_col: &str,
    output: Option<&Path>,
) -> anyhow::Result<Outcome> {
    let rows = read_predictions(predictions, sensitive_col, label_col)?;
    let scores: Vec<f64> = rows.iter().map(|r| r.score).collect();
    let fstar: Vec<f64> = rows.iter().map(|r| r.fstar_score).collect();
    let z: Vec<u8> = rows.iter().map(|r| r.z).collect();
    let y: Vec<u8> = rows.iter().map(|r| r.y).collect();
    let rep = FairnessReport::compute(&scores, &fstar, &z, &y)?;
    println!("{}", serde_json::to_string_pretty(&rep)?);
    eprintln!("{}", rep.cross_tables.render());
    if let Some(path) = output {
        write_json(path, &rep)?;
    }
    Ok(Outcome::Feasible)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub swaps: usize,
    pub raised_group: u8,
    pub reference_test: FairnessReport<f64>,
    /// The reference scores after quantile repair, on each split.
    pub repaired_train: FairnessReport<f64>,
    pub repaired_test: FairnessReport<f64>,
}

/// Massages the training labels with the reference ranker and fits a
/// quantile repair of its scores.
pub fn repair(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let dir = start_run_dir(cfg)?;
    let stage = prepare(cfg)?;
    let fstar: &Model<f64> = &stage.reference.fstar;
    let (massaged, plan) = massage(&stage.train, fstar)?;
    info!(
        "massaging: {} swaps raise group {}",
        plan.promote.len(),
        plan.raised_group
    );
    save_interchange(&massaged, dir.join("massaged_train.csv"))?;
    write_json(&dir.join("massaging_plan.json"), &plan)?;
    write_json(&dir.join("reference.json"), fstar)?;

    let train_scores = fstar.scores_on(&stage.train)?;
    let map = fit_quantile_repair(&train_scores, stage.train.sensitive())?;
    write_json(&dir.join("quantile_map.json"), &map)?;
    let repaired_train = map.apply_all(&train_scores, stage.train.sensitive())?;
    let test_scores = fstar.scores_on(&stage.test)?;
    let repaired_test = map.apply_all(&test_scores, stage.test.sensitive())?;
    write_predictions_csv(
        &dir.join("predictions.csv"),
        &repaired_test,
        &test_scores,
        stage.test.sensitive(),
        stage.test.labels(),
    )?;
    let rep = RepairReport {
        swaps: plan.promote.len(),
        raised_group: plan.raised_group,
        reference_test: report(fstar, fstar, &stage.test)?,
        repaired_train: FairnessReport::compute(
            &repaired_train,
            &train_scores,
            stage.train.sensitive(),
            stage.train.labels(),
        )?,
        repaired_test: FairnessReport::compute(
            &repaired_test,
            &test_scores,
            stage.test.sensitive(),
            stage.test.labels(),
        )?,
    };
    write_json(&dir.join("report.json"), &rep)?;
    info!(
        "repaired test scores: MSP {:.4}, DI {:.4}, tau {:.4}",
        rep.repaired_test.msp, rep.repaired_test.di, rep.repaired_test.tau_bar
    );
    Ok(Outcome::Feasible)
}
