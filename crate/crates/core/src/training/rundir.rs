use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::{SweepCell, TracePoint};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const TRACE_COLUMNS: [&str; 6] = [
    "epoch",
    "loss",
    "bgf_surr",
    "wgf_surr",
    "exact_bgf",
    "exact_wgf",
];
pub const FRONTIER_COLUMNS: [&str; 7] = [
    "lambda",
    "eta",
    "acc",
    "bgf_exact",
    "wgf_exact",
    "bgf_surr",
    "wgf_surr",
];
pub const PREDICTION_COLUMNS: [&str; 7] = [
    "row",
    "z",
    "y",
    "score",
    "fstar_score",
    "pred",
    "fstar_pred",
];

pub fn write_json<V: Serialize + ?Sized>(path: &Path, value: &V) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn opt<T: Scalar>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trace_csv<T: Scalar>(path: &Path, trace: &[TracePoint<T>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_COLUMNS)?;
    for p in trace {
        w.write_record([
            p.epoch.to_string(),
            p.loss.to_string(),
            opt(p.bgf_surr),
            opt(p.wgf_surr),
            opt(p.exact_bgf),
            opt(p.exact_wgf),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_frontier_csv<T: Scalar>(path: &Path, cells: &[SweepCell<T>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(FRONTIER_COLUMNS)?;
    for c in cells {
        w.write_record([
            c.lambda.to_string(),
            c.eta.to_string(),
            c.result.report_test.acc.to_string(),
            opt(c.bgf_exact),
            c.wgf_exact.to_string(),
            opt(c.bgf_surr),
            opt(c.wgf_surr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a predictions file: model and reference scores with group and label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRow {
    pub z: u8,
    pub y: u8,
    pub score: f64,
    pub fstar_score: f64,
}

pub fn write_predictions_csv<T: Scalar>(
    path: &Path,
    scores: &[T],
    fstar_scores: &[T],
    sensitive: &[u8],
    labels: &[u8],
) -> Result<()> {
    let n = scores.len();
    if [fstar_scores.len(), sensitive.len(), labels.len()]
        .iter()
        .any(|&m| m != n)
    {
        return Err(Error::Length("prediction columns differ in length".into()));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(PREDICTION_COLUMNS)?;
    for i in 0..n {
        w.write_record([
            i.to_string(),
            sensitive[i].to_string(),
            labels[i].to_string(),
            scores[i].to_string(),
            fstar_scores[i].to_string(),
            u8::from(scores[i] > T::zero()).to_string(),
            u8::from(fstar_scores[i] > T::zero()).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn binary(field: &str, column: &str, line: usize) -> Result<u8> {
    match field.trim() {
        "0" | "0.0" => Ok(0),
        "1" | "1.0" => Ok(1),
        other => Err(Error::Schema(format!(
            "line {line}: column `{column}` must be 0 or 1, got `{other}`"
        ))),
    }
}

/// Reads a predictions file. Scores come from `score` and `fstar_score`; files
/// that only carry hard predictions (`pred`, `fstar_pred`) are read as scores
/// of +1 and -1.
pub fn read_predictions(
    path: &Path,
    sensitive_col: &str,
    label_col: &str,
) -> Result<Vec<PredictionRow>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header = r.headers()?.clone();
    let find = |name: &str| header.iter().position(|h| h == name);
    let need =
        |name: &str| find(name).ok_or_else(|| Error::Schema(format!("missing column `{name}`")));
    let z_idx = need(sensitive_col)?;
    let y_idx = need(label_col)?;
    let score_cols = match (find("score"), find("fstar_score")) {
        (Some(s), Some(f)) => (s, f, false),
        _ => match (find("pred"), find("fstar_pred")) {
            (Some(s), Some(f)) => (s, f, true),
            _ => {
                return Err(Error::Schema(
                    "need `score`/`fstar_score` or `pred`/`fstar_pred` columns".into(),
                ))
            }
        },
    };
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let get = |idx: usize| {
            rec.get(idx)
                .ok_or_else(|| Error::Schema(format!("line {line}: too few fields")))
        };
        let value = |idx: usize, name: &str| -> Result<f64> {
            let f = get(idx)?;
            if score_cols.2 {
                Ok(if binary(f, name, line)? == 1 {
                    1.0
                } else {
                    -1.0
                })
            } else {
                f.parse::<f64>().map_err(|_| {
                    Error::Schema(format!("line {line}: `{name}` is not a number: `{f}`"))
                })
            }
        };
        rows.push(PredictionRow {
            z: binary(get(z_idx)?, sensitive_col, line)?,
            y: binary(get(y_idx)?, label_col, line)?,
            score: value(score_cols.0, "score")?,
            fstar_score: value(score_cols.1, "fstar_score")?,
        });
    }
    Ok(rows)
}
