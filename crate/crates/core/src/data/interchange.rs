//! CSV + JSON sidecar interchange format. The CSV holds encoded (unscaled)
//! feature values followed by the sensitive, label and split columns; the
//! sidecar holds names and standardization statistics.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetMeta, SplitTag, Standardization};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub name: String,
    pub feature_names: Vec<String>,
    pub sensitive_column: String,
    pub label_column: String,
    pub split_column: String,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub meta: DatasetMeta,
}

fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn save_interchange<T: Scalar>(ds: &Dataset<T>, csv_path: impl AsRef<Path>) -> Result<()> {
    let csv_path = csv_path.as_ref();
    let mut w = csv::Writer::from_path(csv_path)?;
    let mut header: Vec<String> = ds.feature_names().to_vec();
    header.extend(["z".to_string(), "y".to_string(), "split".to_string()]);
    w.write_record(&header)?;
    for i in 0..ds.n() {
        let mut rec: Vec<String> = ds.raw().row(i).iter().map(|x| x.to_string()).collect();
        rec.push(ds.sensitive()[i].to_string());
        rec.push(ds.labels()[i].to_string());
        rec.push(match ds.tags()[i] {
            SplitTag::Train => "train".into(),
            SplitTag::Test => "test".into(),
        });
        w.write_record(&rec)?;
    }
    w.flush()?;
    let std = ds.standardization();
    let sidecar = Sidecar {
        name: ds.name().to_string(),
        feature_names: ds.feature_names().to_vec(),
        sensitive_column: "z".into(),
        label_column: "y".into(),
        split_column: "split".into(),
        mean: std.mean.iter().map(|x| x.as_f64()).collect(),
        sd: std.sd.iter().map(|x| x.as_f64()).collect(),
        meta: ds.meta().clone(),
    };
    std::fs::write(
        sidecar_path(csv_path),
        serde_json::to_string_pretty(&sidecar)?,
    )?;
    Ok(())
}

fn parse<T: FromStr>(v: &str, what: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Schema(format!("cannot parse {what} value `{v}`")))
}

pub fn load_interchange<T: Scalar + FromStr>(csv_path: impl AsRef<Path>) -> Result<Dataset<T>> {
    let csv_path = csv_path.as_ref();
    let side = sidecar_path(csv_path);
    if !side.exists() {
        return Err(Error::MissingFile(side));
    }
    let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(&side)?)?;
    if !csv_path.exists() {
        return Err(Error::MissingFile(csv_path.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(csv_path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let p = sidecar.feature_names.len();
    let mut expected = sidecar.feature_names.clone();
    expected.extend([
        sidecar.sensitive_column.clone(),
        sidecar.label_column.clone(),
        sidecar.split_column.clone(),
    ]);
    if header != expected {
        return Err(Error::Schema(format!(
            "{}: header does not match sidecar",
            csv_path.display()
        )));
    }
    let mut values = Vec::new();
    let (mut sensitive, mut labels, mut tags) = (Vec::new(), Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        for v in rec.iter().take(p) {
            values.push(parse::<T>(v, "feature")?);
        }
        sensitive.push(parse::<u8>(&rec[p], "sensitive")?);
        labels.push(parse::<u8>(&rec[p + 1], "label")?);
        tags.push(match &rec[p + 2] {
            "train" => SplitTag::Train,
            "test" => SplitTag::Test,
            other => return Err(Error::Schema(format!("unknown split tag `{other}`"))),
        });
    }
    let n = sensitive.len();
    let raw = Array2::from_shape_vec((n, p), values).map_err(|e| Error::Schema(e.to_string()))?;
    let std = Standardization {
        mean: sidecar.mean.iter().map(|&x| T::lit(x)).collect(),
        sd: sidecar.sd.iter().map(|&x| T::lit(x)).collect(),
    };
    Dataset::with_standardization(
        sidecar.name,
        raw,
        sensitive,
        labels,
        sidecar.feature_names,
        tags,
        std,
        sidecar.meta,
    )
}
