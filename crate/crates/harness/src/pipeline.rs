//! End-to-end experiment: baseline, balanced splits, unlearning cells, evaluation.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use riskunlearn_core::data::{
    balanced_split, binarize, class_weights, load_container, load_csv, synth_gaussians, SplitResult, SplitSpec,
    SyntheticSpec,
};
use riskunlearn_core::metrics::{evaluate, metric_gap, MetricsReport, RiskConfig};
use riskunlearn_core::model::{init_params, MlpConfig};
use riskunlearn_core::training::{train, LossSpec};
use riskunlearn_core::unlearn::{compute_saliency_mask, unlearn_with_mask, Method, SaliencyMask, UnlearnConfig};
use riskunlearn_core::{Dataset, ParamVector};

use crate::checkpoint;
use crate::config::{DatasetSource, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::seeds::{baseline_seed, cell_seed, data_seed, fraction_key, split_seed};

/// Train and test sets after binarization.
#[derive(Clone, Debug)]
pub struct ExperimentData {
    pub train: Dataset,
    pub test: Dataset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub global: u64,
    pub baseline: u64,
    pub splits: Vec<FractionSeed>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionSeed {
    pub fraction: f64,
    pub seed: u64,
}

/// One (fraction, method) result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub dataset: String,
    pub fraction: f64,
    pub method: Method,
    pub seed: u64,
    pub report: MetricsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub fraction: f64,
    pub report: MetricsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub fraction: f64,
    pub method: Method,
    pub error: String,
}

/// Wall-clock seconds per phase. Excluded from the deterministic artifacts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub baseline: f64,
    pub mask: f64,
    pub unlearn: f64,
    pub eval: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub config: ExperimentConfig,
    pub seeds: SeedRecord,
    pub risks: Vec<String>,
    /// The original model θ_o evaluated against each split.
    pub baseline_report: Vec<BaselineReport>,
    pub reports: Vec<CellReport>,
    pub errors: Vec<CellError>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub timing: Timing,
    #[serde(skip)]
    pub baseline: Option<ParamVector>,
    #[serde(skip)]
    pub checkpoints: Vec<(f64, Method, ParamVector)>,
}

impl RunArtifacts {
    pub fn retrain_report(&self, fraction: f64) -> Option<&CellReport> {
        self.reports
            .iter()
            .find(|c| c.fraction == fraction && c.method == Method::Retrain)
    }
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<ExperimentData> {
    let (train, test) = match &cfg.dataset {
        DatasetSource::Synthetic(s) => {
            let spec = |n: &[usize], role: &str| SyntheticSpec {
                n_per_class: n.to_vec(),
                means: s.means.clone(),
                scale: s.scale,
                label_flip_rate: s.label_flip_rate,
                seed: data_seed(cfg.seed, &cfg.dataset_id, role),
            };
            let train = synth_gaussians(&spec(&s.n_per_class, "train")).map_err(config_err("dataset.synthetic"))?;
            let test = synth_gaussians(&spec(&s.n_test_per_class, "test")).map_err(config_err("dataset.synthetic"))?;
            (train, test)
        }
        DatasetSource::Files(f) => (load_file(&f.train)?, load_file(&f.test)?),
    };
    let (train, test) = match &cfg.binarization {
        Some(b) => {
            let map = b.resolve()?;
            (binarize(&train, &map)?, binarize(&test, &map)?)
        }
        None => (train, test),
    };
    if train.num_classes() != 2 || test.num_classes() != 2 {
        return Err(HarnessError::Config(format!(
            "binarization: data has {} classes; configure a binarization map",
            train.num_classes()
        )));
    }
    if train.dim() != test.dim() {
        return Err(HarnessError::Config(format!(
            "dataset: train dimension {} differs from test dimension {}",
            train.dim(),
            test.dim()
        )));
    }
    if cfg.malignant_class >= 2 {
        return Err(HarnessError::Config(format!(
            "malignant_class: {} is not a binary class",
            cfg.malignant_class
        )));
    }
    Ok(ExperimentData { train, test })
}

fn load_file(path: &Path) -> Result<Dataset> {
    let loaded = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        load_csv(path)
    } else {
        load_container(path)
    };
    loaded.map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))
}

fn config_err(field: &'static str) -> impl Fn(riskunlearn_core::Error) -> HarnessError {
    move |e| HarnessError::Config(format!("{field}: {e}"))
}

pub fn model_config(cfg: &ExperimentConfig, data: &ExperimentData) -> Result<MlpConfig> {
    MlpConfig::with_hidden(data.train.dim(), &cfg.model.hidden, 2).map_err(config_err("model"))
}

/// Baseline model θ_o trained with class-weighted cross-entropy on the full training set.
pub fn train_baseline(cfg: &ExperimentConfig, data: &ExperimentData) -> Result<ParamVector> {
    let seed = baseline_seed(cfg.seed, &cfg.dataset_id);
    let theta0 = init_params(&model_config(cfg, data)?, seed)?;
    let weights = class_weights(&data.train)?;
    Ok(train(
        &theta0,
        &data.train,
        &cfg.baseline.with_seed(seed),
        &LossSpec::WeightedCrossEntropy { weights },
        None,
    )?)
}

pub fn split_for(cfg: &ExperimentConfig, data: &ExperimentData, fraction: f64) -> Result<SplitResult> {
    let spec = SplitSpec::new(fraction, split_seed(cfg.seed, &cfg.dataset_id, fraction))?;
    Ok(balanced_split(&data.train, &spec)?)
}

pub fn unlearn_config(cfg: &ExperimentConfig, fraction: f64, method: Method) -> UnlearnConfig {
    let seed = cell_seed(cfg.seed, &cfg.dataset_id, fraction, method.name());
    let (recipe, alpha) = cfg.method_settings(method);
    UnlearnConfig {
        method,
        sgd: recipe.with_seed(seed),
        alpha,
        malignant_class: cfg.malignant_class,
        seed,
    }
}

/// One unlearning cell. `mask` is shared by the saliency methods of a fraction.
pub fn run_cell(
    theta_o: &ParamVector,
    data: &ExperimentData,
    split: &SplitResult,
    ucfg: &UnlearnConfig,
    mask: Option<&SaliencyMask>,
) -> Result<ParamVector> {
    Ok(unlearn_with_mask(theta_o, &data.train, split, ucfg, mask)?)
}

pub fn evaluate_model(
    params: &ParamVector,
    cfg: &ExperimentConfig,
    data: &ExperimentData,
    split: &SplitResult,
    risks: &[RiskConfig],
) -> Result<MetricsReport> {
    Ok(evaluate(params, &data.train, split, &data.test, risks, cfg.malignant_class)?)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let methods = cfg.parsed_methods()?;
    let risks = cfg.risk_configs()?;
    let data = load_data(cfg)?;
    let mut timing = Timing::default();

    let clock = Instant::now();
    let theta_o = train_baseline(cfg, &data)?;
    timing.baseline = clock.elapsed().as_secs_f64();

    let mut warnings = Vec::new();
    if !methods.contains(&Method::Retrain) {
        warnings.push("retrain is not configured; GAP fields are omitted".to_string());
    }

    let mut reports = Vec::new();
    let mut baseline_report = Vec::new();
    let mut errors = Vec::new();
    let mut checkpoints = Vec::new();
    let mut split_seeds = Vec::new();

    for &fraction in &cfg.fractions {
        split_seeds.push(FractionSeed {
            fraction,
            seed: split_seed(cfg.seed, &cfg.dataset_id, fraction),
        });
        let split = split_for(cfg, &data, fraction)?;

        let clock = Instant::now();
        let base = evaluate_model(&theta_o, cfg, &data, &split, &risks)?;
        timing.eval += clock.elapsed().as_secs_f64();
        baseline_report.push(BaselineReport { fraction, report: base });

        let mut mask: Option<std::result::Result<SaliencyMask, String>> = None;
        let mut ordered = methods.clone();
        ordered.sort_by_key(|&m| m != Method::Retrain);

        let mut reference: Option<MetricsReport> = None;
        let mut cell_reports = Vec::new();
        for method in ordered {
            let ucfg = unlearn_config(cfg, fraction, method);
            let shared = if method.uses_mask() {
                let m = mask.get_or_insert_with(|| {
                    let clock = Instant::now();
                    let m = compute_saliency_mask(&theta_o, &data.train, &split.forget).map_err(|e| e.to_string());
                    timing.mask += clock.elapsed().as_secs_f64();
                    m
                });
                match m {
                    Ok(m) => Some(m.clone()),
                    Err(e) => {
                        errors.push(CellError {
                            fraction,
                            method,
                            error: e.clone(),
                        });
                        continue;
                    }
                }
            } else {
                None
            };

            let clock = Instant::now();
            let outcome = run_cell(&theta_o, &data, &split, &ucfg, shared.as_ref());
            timing.unlearn += clock.elapsed().as_secs_f64();
            let clock = Instant::now();
            let outcome = outcome.and_then(|theta_u| {
                let report = evaluate_model(&theta_u, cfg, &data, &split, &risks)?;
                Ok((theta_u, report))
            });
            timing.eval += clock.elapsed().as_secs_f64();

            match outcome {
                Ok((theta_u, report)) => {
                    if method == Method::Retrain {
                        reference = Some(report.clone());
                    }
                    checkpoints.push((fraction, method, theta_u));
                    cell_reports.push(CellReport {
                        dataset: cfg.dataset_id.clone(),
                        fraction,
                        method,
                        seed: ucfg.seed,
                        report,
                    });
                }
                Err(e) => errors.push(CellError {
                    fraction,
                    method,
                    error: e.to_string(),
                }),
            }
        }

        if methods.contains(&Method::Retrain) && reference.is_none() {
            warnings.push(format!(
                "retrain failed at fraction {}; GAP fields are omitted",
                fraction_key(fraction)
            ));
        }
        for cell in &mut cell_reports {
            cell.report.gap = reference.as_ref().map(|r| metric_gap(&cell.report, r));
        }
        // Restore configured method order.
        cell_reports.sort_by_key(|c| methods.iter().position(|&m| m == c.method));
        reports.extend(cell_reports);
    }

    Ok(RunArtifacts {
        config: cfg.clone(),
        seeds: SeedRecord {
            global: cfg.seed,
            baseline: baseline_seed(cfg.seed, &cfg.dataset_id),
            splits: split_seeds,
        },
        risks: risks.iter().map(|r| r.name.clone()).collect(),
        baseline_report,
        reports,
        errors,
        warnings,
        timing,
        baseline: Some(theta_o),
        checkpoints,
    })
}

pub fn checkpoint_dir(out: &Path) -> PathBuf {
    out.join("checkpoints")
}

pub fn baseline_checkpoint_path(out: &Path) -> PathBuf {
    checkpoint_dir(out).join("baseline.uck")
}

pub fn cell_checkpoint_path(out: &Path, fraction: f64, method: Method) -> PathBuf {
    checkpoint_dir(out).join(format!("f{}_{}.uck", fraction_key(fraction), method.name()))
}

/// Writes the baseline and every θ_u checkpoint.
pub fn save_checkpoints(artifacts: &RunArtifacts, out: &Path) -> Result<()> {
    if let Some(b) = &artifacts.baseline {
        checkpoint::save(b, &baseline_checkpoint_path(out))?;
    }
    for (fraction, method, params) in &artifacts.checkpoints {
        checkpoint::save(params, &cell_checkpoint_path(out, *fraction, *method))?;
    }
    Ok(())
}
