//! Loss-threshold membership inference.
//!
//! The attack is calibrated on known members (retain set) and known
//! non-members (test set), then applied to the forget set. A forget set that
//! still looks like training data scores high.

use serde::{Deserialize, Serialize};

use crate::autodiff::ops::cross_entropy_terms;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{forward_logits, ParamVector};
use crate::scalar::Scalar;

/// Outcome of one calibrated attack.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiaResult {
    /// Samples with loss `≤ threshold` are called members (`-inf`: none).
    pub threshold: f64,
    /// Accuracy of the member/non-member call on the calibration sets.
    pub calibration_accuracy: f64,
    /// Percentage of calibration non-members called members.
    pub false_member_percent: f64,
    /// Percentage of target samples called members.
    pub target_member_percent: f64,
}

/// Pluggable membership attack over per-sample losses.
pub trait MembershipAttack {
    fn attack(&self, member_losses: &[f64], non_member_losses: &[f64], target_losses: &[f64]) -> Result<MiaResult>;
}

/// Threshold on per-sample cross-entropy maximizing calibration accuracy;
/// ties go to the lowest threshold.
#[derive(Clone, Copy, Debug, Default)]
pub struct LossThresholdAttack;

impl MembershipAttack for LossThresholdAttack {
    fn attack(&self, members: &[f64], non_members: &[f64], target: &[f64]) -> Result<MiaResult> {
        if members.is_empty() || non_members.is_empty() || target.is_empty() {
            return Err(Error::Metric("membership inference needs non-empty member, non-member and target sets".into()));
        }
        if members.iter().chain(non_members).chain(target).any(|l| l.is_nan()) {
            return Err(Error::Metric("NaN loss in membership inference".into()));
        }
        let mut pooled: Vec<(f64, bool)> = members
            .iter()
            .map(|&l| (l, true))
            .chain(non_members.iter().map(|&l| (l, false)))
            .collect();
        pooled.sort_by(|a, b| a.0.total_cmp(&b.0));

        // Threshold −∞: everyone is a non-member.
        let mut correct = non_members.len() as i64;
        let mut best = (correct, f64::NEG_INFINITY);
        let mut i = 0;
        while i < pooled.len() {
            let v = pooled[i].0;
            while i < pooled.len() && pooled[i].0 == v {
                correct += if pooled[i].1 { 1 } else { -1 };
                i += 1;
            }
            if correct > best.0 {
                best = (correct, v);
            }
        }
        let threshold = best.1;
        let pct = |ls: &[f64]| 100.0 * ls.iter().filter(|&&l| l <= threshold).count() as f64 / ls.len() as f64;
        Ok(MiaResult {
            threshold,
            calibration_accuracy: best.0 as f64 / pooled.len() as f64,
            false_member_percent: pct(non_members),
            target_member_percent: pct(target),
        })
    }
}

/// Per-sample unweighted cross-entropy under the model.
pub fn sample_losses<T: Scalar>(params: &ParamVector<T>, ds: &Dataset<T>) -> Result<Vec<f64>> {
    let logits = forward_logits(params, ds.features())?;
    let ones = vec![T::one(); ds.num_classes()];
    Ok(cross_entropy_terms(&logits, ds.labels(), &ones)?
        .into_iter()
        .map(Scalar::as_f64)
        .collect())
}

/// Runs `attack` with retain = members, test = non-members, forget = target.
pub fn mia_with<T: Scalar, A: MembershipAttack>(
    attack: &A,
    params: &ParamVector<T>,
    retain: &Dataset<T>,
    test: &Dataset<T>,
    forget: &Dataset<T>,
) -> Result<MiaResult> {
    attack.attack(
        &sample_losses(params, retain)?,
        &sample_losses(params, test)?,
        &sample_losses(params, forget)?,
    )
}

/// Percentage of the forget set the loss-threshold attack calls members.
pub fn mia_score<T: Scalar>(
    params: &ParamVector<T>,
    retain: &Dataset<T>,
    test: &Dataset<T>,
    forget: &Dataset<T>,
) -> Result<f64> {
    Ok(mia_with(&LossThresholdAttack, params, retain, test, forget)?.target_member_percent)
}
