use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion counts, "positive" being the configured positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.tn + self.fp
    }

    pub fn accuracy(&self) -> Option<f64> {
        (self.total() > 0).then(|| (self.tp + self.tn) as f64 / self.total() as f64)
    }
}

pub fn confusion_matrix(predicted: &[usize], truth: &[usize], positive_class: usize) -> Result<ConfusionMatrix> {
    if predicted.len() != truth.len() {
        return Err(Error::Metric(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if positive_class > 1 {
        return Err(Error::Metric(format!("positive class must be 0 or 1, got {positive_class}")));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        if p > 1 || t > 1 {
            return Err(Error::Metric(format!("non-binary label pair (pred {p}, true {t})")));
        }
        match (p == positive_class, t == positive_class) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// `TN / (TN + FP)`; `None` without negatives.
pub fn specificity(cm: &ConfusionMatrix) -> Option<f64> {
    (cm.negatives() > 0).then(|| cm.tn as f64 / cm.negatives() as f64)
}

/// `TP / (TP + FN)`; `None` without positives.
pub fn recall(cm: &ConfusionMatrix) -> Option<f64> {
    (cm.positives() > 0).then(|| cm.tp as f64 / cm.positives() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalancedAccuracy {
    pub specificity: Option<f64>,
    pub recall: Option<f64>,
    pub bac: f64,
    /// Only one class was present; `bac` is that class's rate.
    pub single_class: bool,
}

/// Mean of specificity and recall. With one class absent the defined rate
/// is returned and `single_class` is set.
pub fn balanced_accuracy(cm: &ConfusionMatrix) -> Result<BalancedAccuracy> {
    let (s, r) = (specificity(cm), recall(cm));
    let (bac, single_class) = match (s, r) {
        (Some(s), Some(r)) => ((s + r) / 2.0, false),
        (Some(v), None) | (None, Some(v)) => (v, true),
        (None, None) => return Err(Error::Metric("balanced accuracy of zero samples".into())),
    };
    Ok(BalancedAccuracy {
        specificity: s,
        recall: r,
        bac,
        single_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let truth = [0, 0, 0, 0, 0, 0, 0, 1, 1, 1];
        let cm = confusion_matrix(&truth, &truth, 1).unwrap();
        assert_eq!(cm, ConfusionMatrix { tp: 3, fp: 0, tn: 7, fn_: 0 });
        assert_eq!(balanced_accuracy(&cm).unwrap().bac, 1.0);
    }

    #[test]
    fn all_negative_predictor() {
        let truth = [0, 0, 1, 1, 1, 0];
        let cm = confusion_matrix(&[0; 6], &truth, 1).unwrap();
        assert_eq!(cm.fn_, 3);
        let b = balanced_accuracy(&cm).unwrap();
        assert_eq!((b.recall, b.specificity, b.bac), (Some(0.0), Some(1.0), 0.5));
    }

    #[test]
    fn hand_values() {
        let cm = ConfusionMatrix { tp: 3, fp: 2, tn: 8, fn_: 1 };
        let b = balanced_accuracy(&cm).unwrap();
        assert_eq!(b.specificity, Some(0.8));
        assert_eq!(b.recall, Some(0.75));
        assert!((b.bac - 0.775).abs() < 1e-15);
        assert!(!b.single_class);
    }

    #[test]
    fn single_class_fallback() {
        let cm = confusion_matrix(&[1, 0, 1, 1], &[1, 1, 1, 1], 1).unwrap();
        let b = balanced_accuracy(&cm).unwrap();
        assert!(b.single_class);
        assert_eq!(b.bac, 0.75);
        assert!(balanced_accuracy(&ConfusionMatrix::default()).is_err());
    }

    #[test]
    fn positive_class_zero_swaps_roles() {
        let cm = confusion_matrix(&[0, 1], &[0, 0], 0).unwrap();
        assert_eq!(cm, ConfusionMatrix { tp: 1, fp: 0, tn: 0, fn_: 1 });
    }

    #[test]
    fn errors() {
        assert!(confusion_matrix(&[0], &[0, 1], 1).is_err());
        assert!(confusion_matrix(&[2], &[0], 1).is_err());
        assert!(confusion_matrix(&[0], &[0], 2).is_err());
    }
}
