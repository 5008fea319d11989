//! Unlearning methods: retrain, fine-tuning, random labeling, SalUn and the
//! clinical-risk-aware SalUn variant.
//!
//! The saliency-based methods take gradient steps only on parameters whose
//! forget-loss gradient magnitude reaches the median; all other parameters
//! stay bit-identical to the original model.

mod batching;
mod mask;
mod relabel;

pub use batching::{cra_epoch_batching, BatchTriple};
pub use mask::{compute_saliency_mask, mask_from_magnitudes, median, SaliencyMask};
pub use relabel::relabel_random;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::autodiff::{GradRecord, Var};
use crate::data::{class_weights, Dataset, SplitResult, MALIGNANT};
use crate::error::{Error, Result};
use crate::model::{init_params, ParamVector, RecordedModel};
use crate::scalar::Scalar;
use crate::training::{epoch_rng, optimize, train, LossSpec, SgdConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Retrain,
    FineTune,
    RandomLabel,
    Salun,
    SalunCra,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Retrain,
        Method::FineTune,
        Method::RandomLabel,
        Method::Salun,
        Method::SalunCra,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Retrain => "retrain",
            Method::FineTune => "fine_tune",
            Method::RandomLabel => "random_label",
            Method::Salun => "salun",
            Method::SalunCra => "salun_cra",
        }
    }

    pub fn uses_mask(self) -> bool {
        matches!(self, Method::Salun | Method::SalunCra)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown unlearning method `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnlearnConfig {
    pub method: Method,
    /// Optimizer recipe. Retrain should receive the baseline recipe. Its
    /// `seed` is replaced by [`UnlearnConfig::seed`].
    pub sgd: SgdConfig,
    /// Retain-term weight for the saliency methods.
    pub alpha: f64,
    pub malignant_class: usize,
    /// Drives initialization (retrain), relabeling and shuffling.
    pub seed: u64,
}

impl UnlearnConfig {
    pub fn new(method: Method, sgd: SgdConfig, seed: u64) -> Self {
        Self {
            method,
            sgd,
            alpha: 1.0,
            malignant_class: MALIGNANT,
            seed,
        }
    }

    fn effective_sgd(&self) -> SgdConfig {
        SgdConfig {
            seed: self.seed,
            ..self.sgd.clone()
        }
    }
}

/// The composite forgetting objective over one training set:
///
/// `−H̄(entropy set) + CE(relabeled set, y') + α·wCE(retain set)`
///
/// Each term is the mean over its own batch. SalUn is a special case with
/// an empty entropy set and the whole forget set relabeled.
#[derive(Clone, Debug)]
pub struct CraObjective<'a, T> {
    data: &'a Dataset<T>,
    entropy: Vec<usize>,
    relabeled: Vec<usize>,
    random_labels: Vec<usize>,
    retain: Vec<usize>,
    retain_weights: Vec<T>,
    alpha: T,
}

impl<'a, T: Scalar> CraObjective<'a, T> {
    /// `relabeled[i]` is trained towards `random_labels[i]`; `retain_weights`
    /// are the class weights of the retain term.
    pub fn new(
        data: &'a Dataset<T>,
        entropy: Vec<usize>,
        relabeled: Vec<usize>,
        random_labels: Vec<usize>,
        retain: Vec<usize>,
        retain_weights: Vec<T>,
        alpha: T,
    ) -> Result<Self> {
        if relabeled.len() != random_labels.len() {
            return Err(Error::Shape(format!(
                "{} random labels for {} relabeled samples",
                random_labels.len(),
                relabeled.len()
            )));
        }
        LossSpec::CraComposite {
            weights: retain_weights.clone(),
            alpha,
        }
        .validate(data.num_classes())?;
        let n = data.len();
        if entropy.iter().chain(&relabeled).chain(&retain).any(|&i| i >= n) {
            return Err(Error::Shape(format!("sample index out of range for {n} samples")));
        }
        if random_labels.iter().any(|&y| y >= data.num_classes()) {
            return Err(Error::Contract("random label out of range".into()));
        }
        Ok(Self {
            data,
            entropy,
            relabeled,
            random_labels,
            retain,
            retain_weights,
            alpha,
        })
    }

    pub fn set_sizes(&self) -> [usize; 3] {
        [self.entropy.len(), self.relabeled.len(), self.retain.len()]
    }

    /// Records the objective on the batch `triple` (positions within each set).
    pub fn record(&self, rec: &mut GradRecord<T>, model: &RecordedModel, triple: &BatchTriple) -> Result<Option<Var>> {
        let mut total: Option<Var> = None;
        let mut push = |rec: &mut GradRecord<T>, v: Var| -> Result<()> {
            total = Some(match total {
                Some(t) => rec.add(t, v)?,
                None => v,
            });
            Ok(())
        };
        if !triple.entropy.is_empty() {
            let idx: Vec<usize> = triple.entropy.iter().map(|&p| self.entropy[p]).collect();
            let logits = model.logits(rec, self.data.features().select_rows(&idx)?)?;
            let h = rec.softmax_entropy(logits)?;
            let neg = rec.scale(h, -T::one());
            push(rec, neg)?;
        }
        if !triple.relabeled.is_empty() {
            let idx: Vec<usize> = triple.relabeled.iter().map(|&p| self.relabeled[p]).collect();
            let labels: Vec<usize> = triple.relabeled.iter().map(|&p| self.random_labels[p]).collect();
            let logits = model.logits(rec, self.data.features().select_rows(&idx)?)?;
            let ones = vec![T::one(); self.data.num_classes()];
            let ce = rec.softmax_cross_entropy(logits, &labels, &ones)?;
            push(rec, ce)?;
        }
        if !triple.retain.is_empty() {
            let idx: Vec<usize> = triple.retain.iter().map(|&p| self.retain[p]).collect();
            let labels: Vec<usize> = idx.iter().map(|&i| self.data.labels()[i]).collect();
            let logits = model.logits(rec, self.data.features().select_rows(&idx)?)?;
            let wce = rec.softmax_cross_entropy(logits, &labels, &self.retain_weights)?;
            let scaled = rec.scale(wce, self.alpha);
            push(rec, scaled)?;
        }
        Ok(total)
    }

    /// Objective value and gradient on one batch triple.
    pub fn batch_loss_and_gradient(&self, params: &ParamVector<T>, triple: &BatchTriple) -> Result<(T, Vec<T>)> {
        let mut rec = GradRecord::new(params.len());
        let model = RecordedModel::register(&mut rec, params)?;
        match self.record(&mut rec, &model, triple)? {
            Some(loss) => Ok((rec.value(loss).item().expect("scalar"), rec.backward(loss)?)),
            None => Ok((T::zero(), vec![T::zero(); params.len()])),
        }
    }

    /// Objective over every sample of every set at once.
    pub fn full_loss_and_gradient(&self, params: &ParamVector<T>) -> Result<(T, Vec<T>)> {
        let [a, b, c] = self.set_sizes();
        let triple = BatchTriple {
            entropy: (0..a).collect(),
            relabeled: (0..b).collect(),
            retain: (0..c).collect(),
        };
        self.batch_loss_and_gradient(params, &triple)
    }

    /// Masked SGD over this objective with per-set batch streams.
    pub fn optimize(&self, theta_o: &ParamVector<T>, sgd: &SgdConfig, mask: Option<&SaliencyMask>) -> Result<ParamVector<T>> {
        let sizes = self.set_sizes();
        optimize(
            theta_o,
            sgd,
            mask,
            |epoch| Ok(cra_epoch_batching(sizes, sgd.batch_size, sgd.seed, epoch)),
            |rec, model, triple: &BatchTriple| self.record(rec, model, triple),
        )
    }
}

fn check_split<T: Scalar>(ds: &Dataset<T>, split: &SplitResult) -> Result<()> {
    let n = ds.len();
    let mut seen = vec![false; n];
    for &i in split.forget.iter().chain(&split.retain) {
        if i >= n {
            return Err(Error::UnlearnInput(format!("index {i} out of range for {n} samples")));
        }
        if seen[i] {
            return Err(Error::UnlearnInput(format!("index {i} appears twice across forget/retain")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Draws one random label per forget index, in index order.
fn draw_random_labels<T: Scalar>(ds: &Dataset<T>, indices: &[usize], seed: u64) -> Result<Vec<usize>> {
    let mut rng = epoch_rng(seed, batching::TAG_LABELS, 0);
    indices
        .iter()
        .map(|&i| relabel_random(ds.labels()[i], ds.num_classes(), &mut rng))
        .collect()
}

/// `θ_u = U(θ_o, D_f, D_r)` with the forget/retain partition given as
/// indices into `ds`.
pub fn unlearn<T: Scalar>(
    theta_o: &ParamVector<T>,
    ds: &Dataset<T>,
    split: &SplitResult,
    cfg: &UnlearnConfig,
) -> Result<ParamVector<T>> {
    unlearn_with_mask(theta_o, ds, split, cfg, None)
}

/// As [`unlearn`]; saliency methods use `mask` when given instead of
/// computing it from the forget set.
pub fn unlearn_with_mask<T: Scalar>(
    theta_o: &ParamVector<T>,
    ds: &Dataset<T>,
    split: &SplitResult,
    cfg: &UnlearnConfig,
    mask: Option<&SaliencyMask>,
) -> Result<ParamVector<T>> {
    check_split(ds, split)?;
    if split.retain.is_empty() {
        return Err(Error::UnlearnInput("retain set is empty".into()));
    }
    if cfg.method != Method::Retrain && cfg.method != Method::FineTune && split.forget.is_empty() {
        return Err(Error::UnlearnInput(format!("{} needs a non-empty forget set", cfg.method)));
    }
    if cfg.malignant_class >= ds.num_classes() {
        return Err(Error::Config(format!(
            "malignant class {} out of range for {} classes",
            cfg.malignant_class,
            ds.num_classes()
        )));
    }
    let sgd = cfg.effective_sgd();
    let retain = ds.subset(&split.retain)?;

    match cfg.method {
        Method::Retrain => {
            let fresh = init_params(theta_o.config(), cfg.seed)?;
            let weights = class_weights(&retain)?;
            train(&fresh, &retain, &sgd, &LossSpec::WeightedCrossEntropy { weights }, None)
        }
        Method::FineTune => {
            let weights = class_weights(&retain)?;
            train(theta_o, &retain, &sgd, &LossSpec::WeightedCrossEntropy { weights }, None)
        }
        Method::RandomLabel => {
            let labels = draw_random_labels(ds, &split.forget, cfg.seed)?;
            let combined = ds.subset(&split.forget)?.relabeled(labels)?.concat(&retain)?;
            let weights = class_weights(&combined)?;
            train(theta_o, &combined, &sgd, &LossSpec::WeightedCrossEntropy { weights }, None)
        }
        Method::Salun | Method::SalunCra => {
            let (entropy, relabeled): (Vec<usize>, Vec<usize>) = if cfg.method == Method::SalunCra {
                split
                    .forget
                    .iter()
                    .partition(|&&i| ds.labels()[i] == cfg.malignant_class)
            } else {
                (Vec::new(), split.forget.clone())
            };
            let random_labels = draw_random_labels(ds, &relabeled, cfg.seed)?;
            let objective = CraObjective::new(
                ds,
                entropy,
                relabeled,
                random_labels,
                split.retain.clone(),
                class_weights(&retain)?,
                T::of(cfg.alpha),
            )?;
            let computed;
            let mask = match mask {
                Some(m) => m,
                None => {
                    computed = compute_saliency_mask(theta_o, ds, &split.forget)?;
                    &computed
                }
            };
            objective.optimize(theta_o, &sgd, Some(mask))
        }
    }
}
