use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::ParamVector;
use crate::scalar::Scalar;
use crate::training::{loss_and_gradient, LossSpec};

/// One bit per entry of a [`ParamVector`]; `true` marks a salient (updatable) weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaliencyMask {
    bits: Vec<bool>,
    /// Median gradient magnitude the mask was cut at, when derived from gradients.
    threshold: Option<f64>,
}

impl SaliencyMask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits, threshold: None }
    }

    pub fn all(len: usize) -> Self {
        Self::from_bits(vec![true; len])
    }

    pub fn none(len: usize) -> Self {
        Self::from_bits(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    pub fn selected(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Median of `values`; the mean of the two central order statistics when the
/// count is even.
pub fn median<T: Scalar>(values: &[T]) -> Result<T> {
    let sorted = sorted_magnitudes(values)?;
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        let (lo, hi) = (sorted[n / 2 - 1], sorted[n / 2]);
        lo + (hi - lo) / T::of(2.0)
    })
}

fn sorted_magnitudes<T: Scalar>(values: &[T]) -> Result<Vec<T>> {
    if values.is_empty() {
        return Err(Error::UnlearnInput("median of an empty gradient".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::UnlearnInput("gradient contains NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN excluded"));
    Ok(sorted)
}

/// `m_i = 1 ⇔ |g_i| ≥ γ` with `γ` the median of `|g|`.
///
/// Every magnitude sits at or below the lower central order statistic or at
/// or above the upper one, so `|g_i| ≥ γ` holds exactly when `|g_i|` reaches
/// the upper central order statistic. Comparing against that order statistic
/// avoids rounding in the midpoint.
pub fn mask_from_magnitudes<T: Scalar>(magnitudes: &[T]) -> Result<SaliencyMask> {
    let abs: Vec<T> = magnitudes.iter().map(|v| v.abs()).collect();
    let sorted = sorted_magnitudes(&abs)?;
    let cut = sorted[sorted.len() / 2];
    let gamma = median(&abs)?;
    Ok(SaliencyMask {
        bits: abs.iter().map(|&a| a >= cut).collect(),
        threshold: Some(gamma.as_f64()),
    })
}

/// Saliency mask at `θ_o` from the full-batch unweighted cross-entropy
/// gradient over the forget rows of `ds`.
pub fn compute_saliency_mask<T: Scalar>(
    theta_o: &ParamVector<T>,
    ds: &Dataset<T>,
    forget: &[usize],
) -> Result<SaliencyMask> {
    if forget.is_empty() {
        return Err(Error::UnlearnInput("forget set is empty".into()));
    }
    let forget_set = ds.subset(forget)?;
    let (_, grad) = loss_and_gradient(theta_o, &forget_set, &LossSpec::CrossEntropy)?;
    mask_from_magnitudes(&grad)
}
