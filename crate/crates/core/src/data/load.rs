//! CSV ingestion for the benchmark datasets: row filtering, one-hot encoding and
//! collinearity pruning.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetMeta, SplitTag};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Columns whose absolute correlation with an earlier retained column exceeds
/// this are dropped.
pub const COLLINEARITY_THRESHOLD: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetName {
    Adult,
    Bank,
    Lsac,
    Compas,
}

impl DatasetName {
    pub fn schema(self) -> Schema {
        match self {
            DatasetName::Adult => Schema::adult(),
            DatasetName::Bank => Schema::bank(),
            DatasetName::Lsac => Schema::lsac(),
            DatasetName::Compas => Schema::compas(),
        }
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DatasetName::Adult => "adult",
            DatasetName::Bank => "bank",
            DatasetName::Lsac => "lsac",
            DatasetName::Compas => "compas",
        };
        f.write_str(s)
    }
}

impl FromStr for DatasetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adult" => Ok(DatasetName::Adult),
            "bank" => Ok(DatasetName::Bank),
            "lsac" => Ok(DatasetName::Lsac),
            "compas" => Ok(DatasetName::Compas),
            other => Err(Error::Config(format!("unknown dataset `{other}`"))),
        }
    }
}

/// Positive-label rule; comparisons are case-insensitive on trimmed values.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelRule {
    OneOf(Vec<String>),
    Prefix(String),
}

impl LabelRule {
    fn is_positive(&self, v: &str) -> bool {
        match self {
            LabelRule::OneOf(set) => set.iter().any(|s| s.eq_ignore_ascii_case(v)),
            LabelRule::Prefix(p) => v.to_ascii_lowercase().starts_with(&p.to_ascii_lowercase()),
        }
    }
}

/// Maps the raw sensitive value onto `{0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum SensitiveRule {
    /// Listed values are the privileged group (`Z = 1`).
    PrivilegedOneOf(Vec<String>),
    /// Numeric values inside `[lo, hi]` map to `Z = 0`, everything else to `Z = 1`.
    ZeroInside { lo: f64, hi: f64 },
}

impl SensitiveRule {
    fn map(&self, v: &str) -> Option<u8> {
        match self {
            SensitiveRule::PrivilegedOneOf(set) => {
                Some(set.iter().any(|s| s.eq_ignore_ascii_case(v)) as u8)
            }
            SensitiveRule::ZeroInside { lo, hi } => {
                let x: f64 = v.parse().ok()?;
                Some(if x >= *lo && x <= *hi { 0 } else { 1 })
            }
        }
    }

    fn describe(&self, column: &str) -> String {
        match self {
            SensitiveRule::PrivilegedOneOf(set) => format!("{column} in {set:?} -> 1, otherwise 0"),
            SensitiveRule::ZeroInside { lo, hi } => {
                format!("{column} in [{lo}, {hi}] -> 0, otherwise 1")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowFilter {
    /// Keep rows whose numeric value lies in `[lo, hi]`; missing or non-numeric rows are removed.
    Between {
        column: String,
        lo: f64,
        hi: f64,
    },
    NotEqual {
        column: String,
        value: String,
    },
}

impl RowFilter {
    fn column(&self) -> &str {
        match self {
            RowFilter::Between { column, .. } | RowFilter::NotEqual { column, .. } => column,
        }
    }

    fn keeps(&self, v: &str) -> bool {
        match self {
            RowFilter::Between { lo, hi, .. } => v
                .parse::<f64>()
                .map(|x| x >= *lo && x <= *hi)
                .unwrap_or(false),
            RowFilter::NotEqual { value, .. } => v != value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureSelection {
    /// Every column except the label, the sensitive column and the listed ones.
    AllExcept(Vec<String>),
    Only(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub name: String,
    /// Column names for files shipped without a header row.
    pub column_names: Option<Vec<String>>,
    pub label: String,
    pub label_rule: LabelRule,
    pub sensitive: String,
    pub sensitive_rule: SensitiveRule,
    pub features: FeatureSelection,
    /// Columns treated as categorical even if every value parses as a number.
    pub categorical: Vec<String>,
    pub filters: Vec<RowFilter>,
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl Schema {
    /// UCI Adult (`adult.data` / `adult.test`, headerless). `Z = 1` for male.
    pub fn adult() -> Self {
        Self {
            name: "adult".into(),
            column_names: Some(strings(&[
                "age",
                "workclass",
                "fnlwgt",
                "education",
                "education-num",
                "marital-status",
                "occupation",
                "relationship",
                "race",
                "sex",
                "capital-gain",
                "capital-loss",
                "hours-per-week",
                "native-country",
                "income",
            ])),
            label: "income".into(),
            label_rule: LabelRule::Prefix(">50K".into()),
            sensitive: "sex".into(),
            sensitive_rule: SensitiveRule::PrivilegedOneOf(strings(&["Male"])),
            features: FeatureSelection::AllExcept(vec![]),
            categorical: vec![],
            filters: vec![],
        }
    }

    /// UCI Bank Marketing (`bank-additional-full.csv`). Ages 25 to 60 map to `Z = 0`.
    pub fn bank() -> Self {
        Self {
            name: "bank".into(),
            column_names: None,
            label: "y".into(),
            label_rule: LabelRule::OneOf(strings(&["yes"])),
            sensitive: "age".into(),
            sensitive_rule: SensitiveRule::ZeroInside { lo: 25.0, hi: 60.0 },
            features: FeatureSelection::AllExcept(vec![]),
            categorical: vec![],
            filters: vec![],
        }
    }

    /// Law School admissions; `Z = 1` for white subjects.
    pub fn lsac() -> Self {
        Self {
            name: "lsac".into(),
            column_names: None,
            label: "pass_bar".into(),
            label_rule: LabelRule::OneOf(strings(&["1", "1.0", "passed", "yes", "true"])),
            sensitive: "race".into(),
            sensitive_rule: SensitiveRule::PrivilegedOneOf(strings(&["white", "1", "1.0"])),
            features: FeatureSelection::AllExcept(vec![]),
            categorical: vec![],
            filters: vec![],
        }
    }

    /// ProPublica `compas-scores-two-years.csv` with the usual screening filters.
    /// The label is 1 for a low risk score; `Z = 1` for Caucasian subjects.
    pub fn compas() -> Self {
        Self {
            name: "compas".into(),
            column_names: None,
            label: "score_text".into(),
            label_rule: LabelRule::OneOf(strings(&["Low"])),
            sensitive: "race".into(),
            sensitive_rule: SensitiveRule::PrivilegedOneOf(strings(&["Caucasian"])),
            features: FeatureSelection::Only(strings(&[
                "sex",
                "age_cat",
                "priors_count",
                "c_charge_degree",
                "two_year_recid",
            ])),
            categorical: vec![],
            filters: vec![
                RowFilter::Between {
                    column: "days_b_screening_arrest".into(),
                    lo: -30.0,
                    hi: 30.0,
                },
                RowFilter::NotEqual {
                    column: "is_recid".into(),
                    value: "-1".into(),
                },
                RowFilter::NotEqual {
                    column: "c_charge_degree".into(),
                    value: "O".into(),
                },
                RowFilter::NotEqual {
                    column: "score_text".into(),
                    value: "N/A".into(),
                },
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Drop the first level of each one-hot block, constant columns, and near-duplicate columns.
    pub prune: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { prune: true }
    }
}

pub fn load_dataset<T: Scalar>(name: DatasetName, path: impl AsRef<Path>) -> Result<Dataset<T>> {
    load_files(
        &name.schema(),
        &[(path.as_ref(), SplitTag::Train)],
        LoadOptions::default(),
    )
}

/// Loads a training file and a test file with one shared encoding; rows are
/// tagged so that a `fixed_test_file` split can recover them.
pub fn load_dataset_with_test<T: Scalar>(
    name: DatasetName,
    train: impl AsRef<Path>,
    test: impl AsRef<Path>,
) -> Result<Dataset<T>> {
    load_files(
        &name.schema(),
        &[
            (train.as_ref(), SplitTag::Train),
            (test.as_ref(), SplitTag::Test),
        ],
        LoadOptions::default(),
    )
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path, schema: &Schema) -> Result<Table> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path)?;
    let first = text
        .lines()
        .find(|l| !l.trim().is_empty() && !l.starts_with('|'))
        .unwrap_or("");
    let delimiter = if first.matches(';').count() > first.matches(',').count() {
        b';'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .comment(Some(b'|'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        records.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let mut records = records.into_iter();
    let first = records
        .next()
        .ok_or_else(|| Error::Schema(format!("{} is empty", path.display())))?;
    let (header, rows): (Vec<String>, Vec<Vec<String>>) = match &schema.column_names {
        Some(names)
            if !first
                .iter()
                .zip(names)
                .all(|(a, b)| a.eq_ignore_ascii_case(b))
                || first.len() != names.len() =>
        {
            (
                names.clone(),
                std::iter::once(first).chain(records).collect(),
            )
        }
        _ => (first, records.collect()),
    };
    for (i, r) in rows.iter().enumerate() {
        if r.len() != header.len() {
            return Err(Error::Schema(format!(
                "{}: record {} has {} fields, header has {}",
                path.display(),
                i + 1,
                r.len(),
                header.len()
            )));
        }
    }
    Ok(Table { header, rows })
}

fn column_index(header: &[String]) -> HashMap<&str, usize> {
    let mut map = HashMap::new();
    for (i, h) in header.iter().enumerate() {
        map.entry(h.as_str()).or_insert(i);
    }
    map
}

enum Encoded {
    Numeric,
    Categorical(Vec<String>),
}

/// Loads and encodes one or more files under a schema. Rows with a missing
/// (empty) value in any used column are dropped and counted.
pub fn load_files<T: Scalar>(
    schema: &Schema,
    files: &[(&Path, SplitTag)],
    opts: LoadOptions,
) -> Result<Dataset<T>> {
    let mut feature_cols: Option<Vec<String>> = None;
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut sensitive = Vec::new();
    let mut labels = Vec::new();
    let mut tags = Vec::new();
    let mut dropped_rows = 0usize;

    for &(path, tag) in files {
        let table = read_table(path, schema)?;
        let idx = column_index(&table.header);
        let want = |c: &str| {
            idx.get(c).copied().ok_or_else(|| {
                Error::Schema(format!(
                    "{}: column `{c}` not found for dataset `{}`",
                    path.display(),
                    schema.name
                ))
            })
        };
        let label_i = want(&schema.label)?;
        let sens_i = want(&schema.sensitive)?;
        let filters = schema
            .filters
            .iter()
            .map(|f| want(f.column()).map(|i| (i, f)))
            .collect::<Result<Vec<_>>>()?;
        let cols: Vec<String> = match &schema.features {
            FeatureSelection::Only(list) => list.clone(),
            FeatureSelection::AllExcept(skip) => {
                let mut seen = BTreeSet::new();
                table
                    .header
                    .iter()
                    .filter(|h| **h != schema.label && **h != schema.sensitive && !skip.contains(h))
                    .filter(|h| seen.insert(h.to_string()))
                    .cloned()
                    .collect()
            }
        };
        let col_i = cols.iter().map(|c| want(c)).collect::<Result<Vec<_>>>()?;
        match &feature_cols {
            None => feature_cols = Some(cols),
            Some(prev) if *prev != cols => {
                return Err(Error::Schema(format!(
                    "{} has a different column set",
                    path.display()
                )));
            }
            _ => {}
        }

        for row in &table.rows {
            if !filters.iter().all(|(i, f)| f.keeps(&row[*i])) {
                continue;
            }
            let used = col_i.iter().chain([&label_i, &sens_i]);
            if used.into_iter().any(|&i| row[i].is_empty()) {
                dropped_rows += 1;
                continue;
            }
            let z = schema.sensitive_rule.map(&row[sens_i]).ok_or_else(|| {
                Error::Schema(format!(
                    "sensitive value `{}` is not valid for `{}`",
                    row[sens_i], schema.sensitive
                ))
            })?;
            sensitive.push(z);
            labels.push(schema.label_rule.is_positive(&row[label_i]) as u8);
            tags.push(tag);
            cells.push(col_i.iter().map(|&i| row[i].clone()).collect());
        }
    }
    if dropped_rows > 0 {
        log::info!(
            "{}: dropped {dropped_rows} rows with missing values",
            schema.name
        );
    }
    let feature_cols = feature_cols.unwrap_or_default();
    if sensitive.iter().all(|&z| z == sensitive[0]) || sensitive.is_empty() {
        return Err(Error::SingleSensitiveGroup {
            column: schema.sensitive.clone(),
        });
    }

    // type each column over all loaded rows
    let encodings: Vec<Encoded> = feature_cols
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let numeric = !schema.categorical.contains(name)
                && cells.iter().all(|r| r[j].parse::<f64>().is_ok());
            if numeric {
                Encoded::Numeric
            } else {
                let levels: BTreeSet<&str> = cells.iter().map(|r| r[j].as_str()).collect();
                Encoded::Categorical(levels.into_iter().map(str::to_string).collect())
            }
        })
        .collect();

    let mut names = Vec::new();
    let mut first_levels = Vec::new();
    for (name, enc) in feature_cols.iter().zip(&encodings) {
        match enc {
            Encoded::Numeric => names.push(name.clone()),
            Encoded::Categorical(levels) => {
                for (k, level) in levels.iter().enumerate() {
                    if k == 0 {
                        first_levels.push(names.len());
                    }
                    names.push(format!("{name}={level}"));
                }
            }
        }
    }
    let n = cells.len();
    let mut raw = Array2::<T>::zeros((n, names.len()));
    for (i, row) in cells.iter().enumerate() {
        let mut c = 0;
        for (value, enc) in row.iter().zip(&encodings) {
            match enc {
                Encoded::Numeric => {
                    raw[[i, c]] = T::lit(value.parse::<f64>().expect("typed as numeric"));
                    c += 1;
                }
                Encoded::Categorical(levels) => {
                    let k = levels
                        .binary_search_by(|l| l.as_str().cmp(value))
                        .expect("level seen");
                    raw[[i, c + k]] = T::one();
                    c += levels.len();
                }
            }
        }
    }

    let mut dropped_columns = Vec::new();
    if opts.prune {
        let fit_rows: Vec<usize> = (0..n).filter(|&i| tags[i] == SplitTag::Train).collect();
        let keep = prune_columns(&raw, &fit_rows, &first_levels);
        dropped_columns = (0..names.len())
            .filter(|j| !keep.contains(j))
            .map(|j| names[j].clone())
            .collect();
        raw = raw.select(ndarray::Axis(1), &keep);
        names = keep.iter().map(|&j| names[j].clone()).collect();
    }

    let meta = DatasetMeta {
        source: files
            .iter()
            .map(|(p, _)| p.display().to_string())
            .collect::<Vec<_>>()
            .join(";"),
        sensitive_mapping: schema.sensitive_rule.describe(&schema.sensitive),
        dropped_rows,
        dropped_columns,
        synthetic: None,
    };
    Dataset::from_raw(
        schema.name.clone(),
        raw,
        sensitive,
        labels,
        names,
        Some(tags),
        meta,
    )
}

/// Indices of retained columns: reference levels, constant columns and
/// columns nearly collinear with an earlier retained column are removed.
fn prune_columns<T: Scalar>(raw: &Array2<T>, rows: &[usize], first_levels: &[usize]) -> Vec<usize> {
    let n = rows.len() as f64;
    let standardized: Vec<Option<Vec<f64>>> = (0..raw.ncols())
        .map(|j| {
            if first_levels.contains(&j) {
                return None;
            }
            let col: Vec<f64> = rows.iter().map(|&r| raw[[r, j]].as_f64()).collect();
            let m = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
            if sd <= 1e-12 * m.abs().max(1.0) {
                return None;
            }
            Some(col.into_iter().map(|x| (x - m) / sd).collect())
        })
        .collect();
    let mut keep: Vec<usize> = Vec::new();
    for j in 0..raw.ncols() {
        let Some(zj) = &standardized[j] else { continue };
        let collinear = keep.iter().any(|&k| {
            let zk = standardized[k]
                .as_ref()
                .expect("kept columns are standardized");
            let corr = zj.iter().zip(zk).map(|(a, b)| a * b).sum::<f64>() / n;
            corr.abs() > COLLINEARITY_THRESHOLD
        });
        if !collinear {
            keep.push(j);
        }
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        p
    }

    fn toy_schema() -> Schema {
        Schema {
            name: "toy".into(),
            column_names: None,
            label: "y".into(),
            label_rule: LabelRule::OneOf(vec!["1".into()]),
            sensitive: "z".into(),
            sensitive_rule: SensitiveRule::PrivilegedOneOf(vec!["m".into()]),
            features: FeatureSelection::AllExcept(vec![]),
            categorical: vec![],
            filters: vec![],
        }
    }

    #[test]
    fn one_hot_of_binary_column_gives_two_standardized_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "toy.csv",
            "color,z,y\nred,m,1\nblue,f,0\nred,f,1\nblue,m,0\n",
        );
        let ds: Dataset<f64> = load_files(
            &toy_schema(),
            &[(&p, SplitTag::Train)],
            LoadOptions { prune: false },
        )
        .unwrap();
        assert_eq!(
            ds.feature_names(),
            &["color=blue".to_string(), "color=red".to_string()]
        );
        assert_eq!(ds.n(), 4);
        for col in ds.features().columns() {
            assert!(col.mean().unwrap().abs() < 1e-12);
            assert!((col.mapv(|x| x * x).mean().unwrap() - 1.0).abs() < 1e-12);
        }
        // pruning drops the reference level
        let pruned: Dataset<f64> = load_files(
            &toy_schema(),
            &[(&p, SplitTag::Train)],
            LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(pruned.feature_names(), &["color=red".to_string()]);
        assert_eq!(
            pruned.meta().dropped_columns,
            vec!["color=blue".to_string()]
        );
    }

    #[test]
    fn collinear_numeric_column_is_pruned() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "t.csv",
            "a,b,c,z,y\n1,2,5,m,1\n2,4,1,f,0\n3,6,2,f,1\n4,8,0,m,0\n",
        );
        let ds: Dataset<f64> = load_files(
            &toy_schema(),
            &[(&p, SplitTag::Train)],
            LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(ds.feature_names(), &["a".to_string(), "c".to_string()]);
    }

    #[test]
    fn missing_values_drop_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "t.csv", "a,z,y\n1,m,1\n,f,0\n3,f,1\n4,m,0\n");
        let ds: Dataset<f64> = load_files(
            &toy_schema(),
            &[(&p, SplitTag::Train)],
            LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(ds.n(), 3);
        assert_eq!(ds.meta().dropped_rows, 1);
    }

    #[test]
    fn error_paths() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.csv");
        assert!(matches!(
            load_dataset::<f64>(DatasetName::Bank, &missing),
            Err(Error::MissingFile(_))
        ));
        let p = write(&dir, "t.csv", "a,b\n1,2\n");
        assert!(matches!(
            load_dataset::<f64>(DatasetName::Bank, &p),
            Err(Error::Schema(_))
        ));
        let single = write(&dir, "s.csv", "a,z,y\n1,m,1\n2,m,0\n");
        assert!(matches!(
            load_files::<f64>(
                &toy_schema(),
                &[(&single, SplitTag::Train)],
                LoadOptions::default()
            ),
            Err(Error::SingleSensitiveGroup { .. })
        ));
    }

    #[test]
    fn adult_style_headerless_files_share_an_encoding() {
        let dir = tempfile::tempdir().unwrap();
        let line = |age: u32, wc: &str, sex: &str, inc: &str| {
            format!("{age}, {wc}, 100, HS-grad, 9, Never-married, Sales, Own-child, White, {sex}, 0, 0, 40, United-States, {inc}\n")
        };
        let train = [
            line(30, "Private", "Male", ">50K"),
            line(40, "?", "Female", "<=50K"),
            line(50, "State-gov", "Male", "<=50K"),
        ]
        .concat();
        let test = format!(
            "|1x3 Cross validator\n{}{}",
            line(35, "Private", "Female", ">50K."),
            line(45, "Private", "Male", "<=50K.")
        );
        let ptr = write(&dir, "adult.data", &train);
        let pte = write(&dir, "adult.test", &test);
        let ds: Dataset<f64> = load_dataset_with_test(DatasetName::Adult, &ptr, &pte).unwrap();
        assert_eq!(ds.n(), 5);
        assert_eq!(ds.labels(), &[1, 0, 0, 1, 0]);
        assert_eq!(ds.sensitive(), &[1, 0, 1, 0, 1]);
        assert_eq!(
            ds.tags().iter().filter(|t| **t == SplitTag::Test).count(),
            2
        );
        assert!(ds.feature_names().iter().any(|n| n == "workclass=Private"));
        assert!(!ds.feature_names().iter().any(|n| n.starts_with("sex")));
    }

    #[test]
    fn bank_age_mapping_and_semicolons() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "bank.csv", "\"age\";\"job\";\"y\"\n24;\"admin.\";\"no\"\n25;\"admin.\";\"yes\"\n60;\"services\";\"no\"\n61;\"services\";\"yes\"\n");
        let ds: Dataset<f64> = load_dataset(DatasetName::Bank, &p).unwrap();
        assert_eq!(ds.sensitive(), &[1, 0, 0, 1]);
        assert_eq!(ds.labels(), &[0, 1, 0, 1]);
    }
}
