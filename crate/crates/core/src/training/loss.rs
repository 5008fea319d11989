use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Training objective selector.
#[derive(Clone, Debug, PartialEq)]
pub enum LossSpec<T> {
    /// `−(1/n)·Σ w_{y_i}·log p_{y_i}`.
    WeightedCrossEntropy { weights: Vec<T> },
    /// Unit-weight cross-entropy.
    CrossEntropy,
    /// `−(1/n)·Σ_i H(p_i)`; minimizing it maximizes prediction entropy.
    NegativeEntropy,
    /// `−H̄(D_f⁺) + CE(D_f⁻, y') + α·wCE(D_r)`.
    CraComposite { weights: Vec<T>, alpha: T },
}

impl<T: Scalar> LossSpec<T> {
    pub fn validate(&self, num_classes: usize) -> Result<()> {
        let check_weights = |w: &[T]| {
            if w.len() != num_classes {
                return Err(Error::Config(format!("{} class weights for {num_classes} classes", w.len())));
            }
            if w.iter().any(|&v| !(v > T::zero()) || !v.is_finite()) {
                return Err(Error::Config("class weights must be positive and finite".into()));
            }
            Ok(())
        };
        match self {
            LossSpec::WeightedCrossEntropy { weights } => check_weights(weights),
            LossSpec::CraComposite { weights, alpha } => {
                check_weights(weights)?;
                if !(*alpha > T::zero()) {
                    return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
                }
                Ok(())
            }
            LossSpec::CrossEntropy | LossSpec::NegativeEntropy => Ok(()),
        }
    }
}

fn check_probs<T: Scalar>(probs: &Tensor<T>) -> Result<()> {
    if !probs.is_matrix() {
        return Err(Error::Shape(format!("probabilities must be n×K, got {:?}", probs.shape())));
    }
    Ok(())
}

/// Weighted cross-entropy of probability rows.
///
/// Training uses the fused logit path; on probabilities an exact zero is
/// floored at the smallest positive normal so the result stays finite.
pub fn weighted_cross_entropy<T: Scalar>(probs: &Tensor<T>, labels: &[usize], weights: &[T]) -> Result<T> {
    check_probs(probs)?;
    let k = probs.cols();
    if labels.len() != probs.rows() || weights.len() != k {
        return Err(Error::Shape(format!(
            "{} labels and {} weights for a {}×{k} probability matrix",
            labels.len(),
            weights.len(),
            probs.rows()
        )));
    }
    let mut total = T::zero();
    for (i, &y) in labels.iter().enumerate() {
        if y >= k {
            return Err(Error::Contract(format!("label {y} out of range for {k} classes")));
        }
        let p = probs.at(i, y).max(T::min_positive_value());
        total += weights[y] * -p.ln();
    }
    Ok(total / T::of_usize(labels.len()))
}

/// Mean row entropy `−Σ_c p_c·log p_c`, with `0·log 0 = 0`.
pub fn entropy_loss<T: Scalar>(probs: &Tensor<T>) -> Result<T> {
    check_probs(probs)?;
    let total: T = (0..probs.rows())
        .map(|i| {
            -probs
                .row(i)
                .iter()
                .map(|&p| if p > T::zero() { p * p.ln() } else { T::zero() })
                .sum::<T>()
        })
        .sum();
    Ok(total / T::of_usize(probs.rows()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(rows: &[&[f64]]) -> Tensor<f64> {
        Tensor::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn half_half_is_ln2() {
        let l = weighted_cross_entropy(&p(&[&[0.5, 0.5]]), &[1], &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(l, std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn perfect_prediction_tends_to_zero() {
        let l = weighted_cross_entropy(&p(&[&[1e-12, 1.0 - 1e-12]]), &[1], &[1.0, 1.0]).unwrap();
        assert!(l < 1e-11);
        assert_eq!(weighted_cross_entropy(&p(&[&[0.0, 1.0]]), &[1], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(weighted_cross_entropy(&p(&[&[0.0, 1.0]]), &[0], &[1.0, 1.0]).unwrap().is_finite());
    }

    #[test]
    fn linear_in_weight() {
        let probs = p(&[&[0.3, 0.7]]);
        let one = weighted_cross_entropy(&probs, &[0], &[1.0, 1.0]).unwrap();
        let two = weighted_cross_entropy(&probs, &[0], &[2.0, 1.0]).unwrap();
        assert_eq!(two, 2.0 * one);
    }

    #[test]
    fn entropy_extremes() {
        assert_abs_diff_eq!(entropy_loss(&p(&[&[0.5, 0.5]])).unwrap(), std::f64::consts::LN_2, epsilon = 1e-12);
        assert_eq!(entropy_loss(&p(&[&[0.0, 1.0]])).unwrap(), 0.0);
        assert_abs_diff_eq!(entropy_loss(&p(&[&[0.25; 4]])).unwrap(), 1.386294, epsilon = 1e-6);
    }

    #[test]
    fn spec_validation() {
        assert!(LossSpec::WeightedCrossEntropy { weights: vec![1.0] }.validate(2).is_err());
        assert!(LossSpec::WeightedCrossEntropy { weights: vec![1.0, 0.0] }.validate(2).is_err());
        assert!(LossSpec::CraComposite { weights: vec![1.0, 1.0], alpha: 0.0 }.validate(2).is_err());
        assert!(LossSpec::<f64>::NegativeEntropy.validate(2).is_ok());
    }
}
