//! Datasets: the `(X, Z, Y)` triple, standardization and train/test splitting.
//!
//! A [`Dataset`] keeps both the encoded-but-unscaled matrix and the standardized
//! matrix derived from it, so that a split can refit the column statistics on its
//! training rows without losing precision.

mod interchange;
mod load;
mod synthetic;

pub use interchange::{load_interchange, save_interchange, Sidecar};
pub use load::{
    load_dataset, load_dataset_with_test, load_files, DatasetName, FeatureSelection, LabelRule,
    LoadOptions, RowFilter, Schema, SensitiveRule,
};
pub use synthetic::{make_synthetic, SyntheticTruth};

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which file a row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTag {
    Train,
    Test,
}

/// Per-column affine map `x -> (x - mean) / sd`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization<T> {
    pub mean: Vec<T>,
    pub sd: Vec<T>,
}

impl<T: Scalar> Standardization<T> {
    /// Population mean and standard deviation of the selected rows. Constant
    /// columns get `sd = 1` so they map to zero.
    pub fn fit(raw: &Array2<T>, rows: &[usize]) -> Self {
        let p = raw.ncols();
        let n = T::from_usize_lossy(rows.len().max(1));
        let mut mean = vec![T::zero(); p];
        for &r in rows {
            for (m, &x) in mean.iter_mut().zip(raw.row(r).iter()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![T::zero(); p];
        for &r in rows {
            for ((v, &x), &m) in var.iter_mut().zip(raw.row(r).iter()).zip(&mean) {
                let d = x - m;
                *v += d * d;
            }
        }
        let sd = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > T::zero() {
                    s
                } else {
                    T::one()
                }
            })
            .collect();
        Self { mean, sd }
    }

    pub fn identity(p: usize) -> Self {
        Self {
            mean: vec![T::zero(); p],
            sd: vec![T::one(); p],
        }
    }

    pub fn apply(&self, raw: &Array2<T>) -> Array2<T> {
        let mut out = raw.clone();
        for mut row in out.axis_iter_mut(Axis(0)) {
            for ((x, &m), &s) in row.iter_mut().zip(&self.mean).zip(&self.sd) {
                *x = (*x - m) / s;
            }
        }
        out
    }
}

/// Provenance and preprocessing log carried alongside the data.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub source: String,
    pub sensitive_mapping: String,
    pub dropped_rows: usize,
    pub dropped_columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    name: String,
    raw: Array2<T>,
    features: Array2<T>,
    sensitive: Vec<u8>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    tags: Vec<SplitTag>,
    standardization: Standardization<T>,
    meta: DatasetMeta,
}

fn check_binary(name: &str, v: &[u8]) -> Result<()> {
    if v.iter().any(|&b| b > 1) {
        return Err(Error::Schema(format!("{name} must contain only 0 or 1")));
    }
    Ok(())
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset whose standardization is fit on the rows tagged `Train`
    /// (all rows when none are tagged `Test`).
    pub fn from_raw(
        name: impl Into<String>,
        raw: Array2<T>,
        sensitive: Vec<u8>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
        tags: Option<Vec<SplitTag>>,
        meta: DatasetMeta,
    ) -> Result<Self> {
        let n = raw.nrows();
        let tags = tags.unwrap_or_else(|| vec![SplitTag::Train; n]);
        let fit_rows: Vec<usize> = (0..n).filter(|&i| tags[i] == SplitTag::Train).collect();
        let std = Standardization::fit(&raw, &fit_rows);
        Self::with_standardization(name, raw, sensitive, labels, feature_names, tags, std, meta)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_standardization(
        name: impl Into<String>,
        raw: Array2<T>,
        sensitive: Vec<u8>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
        tags: Vec<SplitTag>,
        standardization: Standardization<T>,
        meta: DatasetMeta,
    ) -> Result<Self> {
        let n = raw.nrows();
        let p = raw.ncols();
        for (what, len) in [
            ("sensitive", sensitive.len()),
            ("labels", labels.len()),
            ("tags", tags.len()),
        ] {
            if len != n {
                return Err(Error::Length(format!(
                    "{what} has {len} entries for {n} rows"
                )));
            }
        }
        if feature_names.len() != p {
            return Err(Error::Dimension {
                expected: p,
                got: feature_names.len(),
            });
        }
        if standardization.mean.len() != p || standardization.sd.len() != p {
            return Err(Error::Dimension {
                expected: p,
                got: standardization.mean.len(),
            });
        }
        check_binary("sensitive", &sensitive)?;
        check_binary("labels", &labels)?;
        let features = standardization.apply(&raw);
        let ds = Self {
            name: name.into(),
            raw,
            features,
            sensitive,
            labels,
            feature_names,
            tags,
            standardization,
            meta,
        };
        let [n0, n1] = ds.group_sizes();
        if n0 == 0 || n1 == 0 {
            return Err(Error::EmptyGroup(format!(
                "dataset `{}` has group sizes ({n0}, {n1})",
                ds.name
            )));
        }
        Ok(ds)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.raw.nrows()
    }

    pub fn p(&self) -> usize {
        self.raw.ncols()
    }

    /// Standardized feature matrix, `n x p`.
    pub fn features(&self) -> &Array2<T> {
        &self.features
    }

    /// Encoded feature matrix before standardization.
    pub fn raw(&self) -> &Array2<T> {
        &self.raw
    }

    pub fn sensitive(&self) -> &[u8] {
        &self.sensitive
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn tags(&self) -> &[SplitTag] {
        &self.tags
    }

    pub fn standardization(&self) -> &Standardization<T> {
        &self.standardization
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn group_sizes(&self) -> [usize; 2] {
        let n1 = self.sensitive.iter().filter(|&&z| z == 1).count();
        [self.n() - n1, n1]
    }

    /// Row subset. The standardization statistics are inherited unchanged.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let raw = self.raw.select(Axis(0), rows);
        let pick = |v: &[u8]| rows.iter().map(|&r| v[r]).collect::<Vec<_>>();
        Self::with_standardization(
            self.name.clone(),
            raw,
            pick(&self.sensitive),
            pick(&self.labels),
            self.feature_names.clone(),
            rows.iter().map(|&r| self.tags[r]).collect(),
            self.standardization.clone(),
            self.meta.clone(),
        )
    }

    /// Same rows, standardized with different statistics.
    pub fn restandardized(&self, standardization: Standardization<T>) -> Self {
        let features = standardization.apply(&self.raw);
        Self {
            features,
            standardization,
            ..self.clone()
        }
    }

    /// Copy with the label vector replaced (used by label repair).
    pub fn with_labels(&self, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::Length(format!(
                "{} labels for {} rows",
                labels.len(),
                self.n()
            )));
        }
        check_binary("labels", &labels)?;
        Ok(Self {
            labels,
            ..self.clone()
        })
    }

    /// Treats the standardized matrix as new raw data and standardizes it again.
    pub fn standardize_again(&self) -> Result<Self> {
        Self::from_raw(
            self.name.clone(),
            self.features.clone(),
            self.sensitive.clone(),
            self.labels.clone(),
            self.feature_names.clone(),
            Some(self.tags.clone()),
            self.meta.clone(),
        )
    }

    pub fn map_scalar<U: Scalar>(&self) -> Dataset<U> {
        let cast = |a: &Array2<T>| a.mapv(|x| U::lit(x.as_f64()));
        let castv = |v: &[T]| v.iter().map(|&x| U::lit(x.as_f64())).collect::<Vec<_>>();
        Dataset {
            name: self.name.clone(),
            raw: cast(&self.raw),
            features: cast(&self.features),
            sensitive: self.sensitive.clone(),
            labels: self.labels.clone(),
            feature_names: self.feature_names.clone(),
            tags: self.tags.clone(),
            standardization: Standardization {
                mean: castv(&self.standardization.mean),
                sd: castv(&self.standardization.sd),
            },
            meta: self.meta.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    FixedTestFile,
    RandomRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub mode: SplitMode,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_ratio() -> f64 {
    0.8
}

fn default_repeats() -> usize {
    5
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            mode: SplitMode::RandomRatio,
            ratio: default_ratio(),
            repeats: default_repeats(),
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::Config(format!(
                "split ratio {} is not strictly between 0 and 1",
                self.ratio
            )));
        }
        if self.repeats == 0 {
            return Err(Error::Config("split repeats must be at least 1".into()));
        }
        Ok(())
    }
}

const SPLIT_RETRIES: usize = 64;

fn has_both_groups(sensitive: &[u8], rows: &[usize]) -> bool {
    let ones = rows.iter().filter(|&&r| sensitive[r] == 1).count();
    ones > 0 && ones < rows.len()
}

/// Row indices `(train, test)` for one repeat; both sorted ascending.
pub fn split_indices<T: Scalar>(
    ds: &Dataset<T>,
    spec: &SplitSpec,
    repeat_index: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    if repeat_index >= spec.repeats {
        return Err(Error::Config(format!(
            "repeat index {repeat_index} out of range 0..{}",
            spec.repeats
        )));
    }
    let n = ds.n();
    match spec.mode {
        SplitMode::FixedTestFile => {
            let (train, test): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&i| ds.tags[i] == SplitTag::Train);
            if test.is_empty() {
                return Err(Error::Split(
                    "fixed_test_file mode but no rows came from a test file".into(),
                ));
            }
            if !has_both_groups(&ds.sensitive, &train) || !has_both_groups(&ds.sensitive, &test) {
                return Err(Error::Split(
                    "a side of the fixed split lacks a sensitive group".into(),
                ));
            }
            Ok((train, test))
        }
        SplitMode::RandomRatio => {
            let n_train = (spec.ratio * n as f64).round() as usize;
            if n_train == 0 || n_train >= n {
                return Err(Error::Split(format!(
                    "ratio {} leaves an empty side for n = {n}",
                    spec.ratio
                )));
            }
            let stream = (repeat_index as u64)
                .wrapping_add(1)
                .wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ stream);
            let mut idx: Vec<usize> = (0..n).collect();
            for _ in 0..SPLIT_RETRIES {
                idx.shuffle(&mut rng);
                let mut train = idx[..n_train].to_vec();
                let mut test = idx[n_train..].to_vec();
                if has_both_groups(&ds.sensitive, &train) && has_both_groups(&ds.sensitive, &test) {
                    train.sort_unstable();
                    test.sort_unstable();
                    return Ok((train, test));
                }
            }
            Err(Error::Split(format!(
                "no split with both groups on each side after {SPLIT_RETRIES} draws"
            )))
        }
    }
}

/// Train/test pair with standardization refit on the training rows.
pub fn split<T: Scalar>(
    ds: &Dataset<T>,
    spec: &SplitSpec,
    repeat_index: usize,
) -> Result<(Dataset<T>, Dataset<T>)> {
    let (train_rows, test_rows) = split_indices(ds, spec, repeat_index)?;
    let std = Standardization::fit(&ds.raw, &train_rows);
    let train = ds.select_rows(&train_rows)?.restandardized(std.clone());
    let test = ds.select_rows(&test_rows)?.restandardized(std);
    Ok((train, test))
}
