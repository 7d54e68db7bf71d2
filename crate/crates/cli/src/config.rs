use std::path::{Component, Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use wgf::data::{
    load_dataset, load_dataset_with_test, load_interchange, make_synthetic, Dataset, DatasetName,
    SplitSpec,
};
use wgf::models::ModelKind;
use wgf::penalties::PenaltySpec;
use wgf::training::{OptimizerConfig, SweepGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Adult,
    Bank,
    Lsac,
    Compas,
    Synthetic,
    /// A CSV written by `save_interchange`, such as the output of `wgf repair`.
    Interchange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n: usize,
    pub p: usize,
    #[serde(default = "default_gap")]
    pub group_gap: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_gap() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: DatasetSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub model_kind: ModelKind,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default = "PenaltySpec::unconstrained")]
    pub penalty: PenaltySpec,
    pub optimizer: OptimizerConfig,
    /// Schedule for the reference model; defaults to `optimizer`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_optimizer: Option<OptimizerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
    /// Which split repeat to run.
    #[serde(default)]
    pub repeat: usize,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths are taken from the file's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg =
            Self::from_json(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        let base = std::fs::canonicalize(base).unwrap_or_else(|_| base.to_path_buf());
        let resolve = |p: &mut PathBuf| *p = normalize(&base.join(&*p));
        resolve(&mut cfg.output_dir);
        cfg.dataset.path.as_mut().map(resolve);
        cfg.dataset.test_path.as_mut().map(resolve);
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.penalty.validate()?;
        self.optimizer.validate()?;
        if let Some(o) = &self.reference_optimizer {
            o.validate()?;
        }
        if let Some(g) = &self.sweep {
            g.validate()?;
        }
        self.split.validate()?;
        if self.repeat >= self.split.repeats {
            bail!(
                "repeat {} is out of range for {} split repeats",
                self.repeat,
                self.split.repeats
            );
        }
        let d = &self.dataset;
        match d.name {
            DatasetSource::Synthetic => {
                if d.synthetic.is_none() {
                    bail!("dataset `synthetic` needs a `synthetic` block");
                }
            }
            _ => {
                if d.path.is_none() {
                    bail!(
                        "dataset `{}` needs a `path`",
                        serde_json::to_value(d.name)?.as_str().unwrap_or("?")
                    );
                }
                if d.synthetic.is_some() {
                    bail!("a `synthetic` block is only allowed with dataset `synthetic`");
                }
            }
        }
        Ok(())
    }

    pub fn reference_optimizer(&self) -> &OptimizerConfig {
        self.reference_optimizer.as_ref().unwrap_or(&self.optimizer)
    }

    /// Replaces every seed in the config.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.optimizer.seed = seed;
        if let Some(o) = self.reference_optimizer.as_mut() {
            o.seed = seed;
        }
        self.split.seed = seed;
        self
    }

    pub fn load_dataset(&self) -> anyhow::Result<Dataset<f64>> {
        let d = &self.dataset;
        let named = |name: DatasetName| -> wgf::Result<Dataset<f64>> {
            let path = d.path.as_ref().expect("validated");
            match &d.test_path {
                Some(test) => load_dataset_with_test(name, path, test),
                None => load_dataset(name, path),
            }
        };
        Ok(match d.name {
            DatasetSource::Adult => named(DatasetName::Adult)?,
            DatasetSource::Bank => named(DatasetName::Bank)?,
            DatasetSource::Lsac => named(DatasetName::Lsac)?,
            DatasetSource::Compas => named(DatasetName::Compas)?,
            DatasetSource::Interchange => load_interchange(d.path.as_ref().expect("validated"))?,
            DatasetSource::Synthetic => {
                let s = d.synthetic.as_ref().expect("validated");
                make_synthetic(s.n, s.p, s.group_gap, s.seed)?
            }
        })
    }
}

/// Removes `.` and `..` components without touching the filesystem.
fn normalize(path: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for c in path.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir => {
                if !out.pop() {
                    out.push(c);
                }
            }
            c => out.push(c),
        }
    }
    out
}
