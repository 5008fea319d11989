//! JSON experiment configuration. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use riskunlearn_core::data::BinarizationMap;
use riskunlearn_core::metrics::RiskConfig;
use riskunlearn_core::training::SgdConfig;
use riskunlearn_core::unlearn::Method;

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_dataset_id")]
    pub dataset_id: String,
    pub dataset: DatasetSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binarization: Option<Binarization>,
    #[serde(default = "default_fractions")]
    pub fractions: Vec<f64>,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default = "Recipe::baseline")]
    pub baseline: Recipe,
    #[serde(default = "Recipe::unlearning")]
    pub unlearning: Recipe,
    pub methods: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, MethodOverride>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_malignant")]
    pub malignant_class: usize,
    #[serde(default = "default_risks")]
    pub risks: Vec<RiskEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic(SyntheticSource),
    Files(FileSource),
}

/// Gaussian blobs; train and test sets are drawn from independent seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSource {
    pub n_per_class: Vec<usize>,
    pub n_test_per_class: Vec<usize>,
    pub means: Vec<Vec<f64>>,
    pub scale: f64,
    #[serde(default)]
    pub label_flip_rate: f64,
}

/// `.csv` files are read as CSV, everything else as a `UDS1` container.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSource {
    pub train: PathBuf,
    pub test: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Binarization {
    Preset(String),
    Map { map: Vec<usize> },
}

impl Binarization {
    pub fn resolve(&self) -> Result<BinarizationMap> {
        match self {
            Binarization::Preset(name) => BinarizationMap::preset(name).ok_or_else(|| {
                HarnessError::Config(format!(
                    "binarization: unknown preset `{name}` (expected dermamnist, pathmnist or identity)"
                ))
            }),
            Binarization::Map { map } => BinarizationMap::new(map.clone())
                .map_err(|e| HarnessError::Config(format!("binarization.map: {e}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub hidden: Vec<usize>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self { hidden: vec![32] }
    }
}

/// Optimizer settings without a seed; seeds are derived per cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Recipe {
    pub fn baseline() -> Self {
        Self::from_sgd(&SgdConfig::baseline(0))
    }

    pub fn unlearning() -> Self {
        Self::from_sgd(&SgdConfig::unlearning(0))
    }

    fn from_sgd(s: &SgdConfig) -> Self {
        Self {
            learning_rate: s.learning_rate,
            momentum: s.momentum,
            batch_size: s.batch_size,
            epochs: s.epochs,
        }
    }

    pub fn with_seed(&self, seed: u64) -> SgdConfig {
        SgdConfig {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed,
        }
    }
}

/// Per-method replacements for the shared unlearning settings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RiskEntry {
    Preset(String),
    Custom(RiskConfig),
}

fn default_dataset_id() -> String {
    "synthetic".into()
}

fn default_fractions() -> Vec<f64> {
    vec![0.2, 0.5]
}

fn default_alpha() -> f64 {
    1.0
}

fn default_malignant() -> usize {
    1
}

fn default_risks() -> Vec<RiskEntry> {
    vec![RiskEntry::Preset("I".into()), RiskEntry::Preset("II".into())]
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// The overlapping two-class Gaussian benchmark with 10% label noise.
    pub fn default_synthetic() -> Self {
        Self {
            dataset_id: default_dataset_id(),
            dataset: DatasetSource::Synthetic(SyntheticSource {
                n_per_class: vec![320, 80],
                n_test_per_class: vec![320, 80],
                means: vec![vec![0.0; 4], vec![1.5; 4]],
                scale: 1.0,
                label_flip_rate: 0.1,
            }),
            binarization: None,
            fractions: default_fractions(),
            model: ModelSpec::default(),
            baseline: Recipe::baseline(),
            unlearning: Recipe::unlearning(),
            methods: Method::ALL.iter().map(|m| m.name().to_string()).collect(),
            overrides: BTreeMap::new(),
            alpha: default_alpha(),
            malignant_class: default_malignant(),
            risks: default_risks(),
            output_dir: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(HarnessError::Config(m));
        if self.dataset_id.is_empty() {
            return cfg_err("dataset_id: must not be empty".into());
        }
        if self.fractions.is_empty() {
            return cfg_err("fractions: at least one forget fraction is required".into());
        }
        for (i, &f) in self.fractions.iter().enumerate() {
            if !(f > 0.0 && f < 1.0) {
                return cfg_err(format!("fractions[{i}]: {f} is not in (0, 1)"));
            }
            if self.fractions[..i].contains(&f) {
                return cfg_err(format!("fractions[{i}]: duplicate fraction {f}"));
            }
        }
        self.parsed_methods()?;
        for key in self.overrides.keys() {
            if key.parse::<Method>().is_err() {
                return cfg_err(format!("overrides.{key}: unknown unlearning method `{key}`"));
            }
        }
        if let Some(b) = &self.binarization {
            b.resolve()?;
        }
        self.risk_configs()?;
        if self.model.hidden.contains(&0) {
            return cfg_err("model.hidden: layer sizes must be ≥ 1".into());
        }
        if let DatasetSource::Synthetic(s) = &self.dataset {
            if s.n_test_per_class.len() != s.n_per_class.len() {
                return cfg_err("dataset.synthetic.n_test_per_class: one entry per class required".into());
            }
        }
        Ok(())
    }

    /// Methods in configured order, validated.
    pub fn parsed_methods(&self) -> Result<Vec<Method>> {
        if self.methods.is_empty() {
            return Err(HarnessError::Config("methods: at least one method is required".into()));
        }
        let mut out = Vec::new();
        for (i, name) in self.methods.iter().enumerate() {
            let m: Method = name
                .parse()
                .map_err(|_| HarnessError::Config(format!("methods[{i}]: unknown unlearning method `{name}`")))?;
            if out.contains(&m) {
                return Err(HarnessError::Config(format!("methods[{i}]: duplicate method `{name}`")));
            }
            out.push(m);
        }
        Ok(out)
    }

    pub fn risk_configs(&self) -> Result<Vec<RiskConfig>> {
        let mut out: Vec<RiskConfig> = Vec::new();
        for (i, r) in self.risks.iter().enumerate() {
            let rc = match r {
                RiskEntry::Preset(name) => RiskConfig::preset(name).ok_or_else(|| {
                    HarnessError::Config(format!("risks[{i}]: unknown risk preset `{name}` (expected I or II)"))
                })?,
                RiskEntry::Custom(rc) => {
                    rc.validate().map_err(|e| HarnessError::Config(format!("risks[{i}]: {e}")))?;
                    rc.clone()
                }
            };
            if out.iter().any(|o| o.name == rc.name) {
                return Err(HarnessError::Config(format!("risks[{i}]: duplicate risk name `{}`", rc.name)));
            }
            out.push(rc);
        }
        Ok(out)
    }

    /// Unlearning recipe and alpha for `method`, overrides applied.
    pub fn method_settings(&self, method: Method) -> (Recipe, f64) {
        let base = if method == Method::Retrain {
            self.baseline.clone()
        } else {
            self.unlearning.clone()
        };
        let Some(o) = self.overrides.get(method.name()) else {
            return (base, self.alpha);
        };
        (
            Recipe {
                learning_rate: o.learning_rate.unwrap_or(base.learning_rate),
                momentum: o.momentum.unwrap_or(base.momentum),
                batch_size: o.batch_size.unwrap_or(base.batch_size),
                epochs: o.epochs.unwrap_or(base.epochs),
            },
            o.alpha.unwrap_or(self.alpha),
        )
    }
}
