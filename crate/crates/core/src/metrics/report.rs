use serde::{Deserialize, Serialize};

use super::{auc, balanced_accuracy, confusion_matrix, global_risk, mia_score, BalancedAccuracy, ConfusionMatrix, RiskConfig};
use crate::data::{Dataset, SplitResult};
use crate::error::{Error, Result};
use crate::model::{predict_proba, ParamVector};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskValue {
    pub name: String,
    pub value: f64,
}

/// Absolute metric differences against a reference (normally Retrain).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub ubac: f64,
    pub rbac: f64,
    pub tbac: f64,
    /// In percentage points, as reported.
    pub mia: f64,
    /// Mean of the four gaps above, with MIA rescaled to `[0, 1]`.
    pub mean: f64,
    pub specificity: f64,
    pub recall: f64,
    pub bac: f64,
    pub auc: f64,
}

/// Utility (on the test set), unlearning and risk metrics of one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub specificity: f64,
    pub recall: f64,
    pub bac: f64,
    pub auc: f64,
    pub ubac: f64,
    pub rbac: f64,
    pub tbac: f64,
    /// Percentage in `[0, 100]`.
    pub mia: f64,
    pub risks: Vec<RiskValue>,
    pub test_confusion: ConfusionMatrix,
    /// Some balanced accuracy was computed on a subset holding one class only.
    pub single_class: bool,
    pub gap: Option<GapReport>,
}

impl MetricsReport {
    pub fn risk(&self, name: &str) -> Option<f64> {
        self.risks.iter().find(|r| r.name == name).map(|r| r.value)
    }
}

/// Balanced accuracy of argmax predictions on `ds`.
pub fn set_bac<T: Scalar>(params: &ParamVector<T>, ds: &Dataset<T>, positive_class: usize) -> Result<BalancedAccuracy> {
    if ds.is_empty() {
        return Err(Error::Metric("balanced accuracy of an empty set".into()));
    }
    let pred = predict_proba(params, ds.features())?.argmax_rows();
    balanced_accuracy(&confusion_matrix(&pred, ds.labels(), positive_class)?)
}

/// Full report for `params`. `train` is the training set the split indexes.
pub fn evaluate<T: Scalar>(
    params: &ParamVector<T>,
    train: &Dataset<T>,
    split: &SplitResult,
    test: &Dataset<T>,
    risks: &[RiskConfig],
    positive_class: usize,
) -> Result<MetricsReport> {
    if train.num_classes() != 2 || test.num_classes() != 2 {
        return Err(Error::Metric("evaluation is defined for binary labels".into()));
    }
    if split.forget.is_empty() || split.retain.is_empty() {
        return Err(Error::Metric("forget and retain sets must be non-empty".into()));
    }
    let forget = train.subset(&split.forget)?;
    let retain = train.subset(&split.retain)?;

    let probs = predict_proba(params, test.features())?;
    let pred = probs.argmax_rows();
    let cm = confusion_matrix(&pred, test.labels(), positive_class)?;
    let test_bac = balanced_accuracy(&cm)?;
    let (Some(spec), Some(rec)) = (test_bac.specificity, test_bac.recall) else {
        return Err(Error::Metric("test set must contain both classes".into()));
    };
    let scores: Vec<T> = (0..probs.rows()).map(|i| probs.at(i, positive_class)).collect();
    let area = auc(&scores, test.labels(), positive_class)?;

    let u = set_bac(params, &forget, positive_class)?;
    let r = set_bac(params, &retain, positive_class)?;
    let risk_values = risks
        .iter()
        .map(|rc| {
            Ok(RiskValue {
                name: rc.name.clone(),
                value: global_risk(&cm, rc, test.len())?,
            })
        })
        .collect::<Result<_>>()?;

    Ok(MetricsReport {
        specificity: spec,
        recall: rec,
        bac: test_bac.bac,
        auc: area,
        ubac: u.bac,
        rbac: r.bac,
        tbac: test_bac.bac,
        mia: mia_score(params, &retain, test, &forget)?,
        risks: risk_values,
        test_confusion: cm,
        single_class: u.single_class || r.single_class,
        gap: None,
    })
}

/// `|M_u − M_ref|` per metric and their mean (MIA divided by 100 first).
pub fn metric_gap(report: &MetricsReport, reference: &MetricsReport) -> GapReport {
    let d = |a: f64, b: f64| (a - b).abs();
    let ubac = d(report.ubac, reference.ubac);
    let rbac = d(report.rbac, reference.rbac);
    let tbac = d(report.tbac, reference.tbac);
    let mia = d(report.mia, reference.mia);
    GapReport {
        ubac,
        rbac,
        tbac,
        mia,
        mean: (ubac + rbac + tbac + mia / 100.0) / 4.0,
        specificity: d(report.specificity, reference.specificity),
        recall: d(report.recall, reference.recall),
        bac: d(report.bac, reference.bac),
        auc: d(report.auc, reference.auc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(ubac: f64, rbac: f64, tbac: f64, mia: f64) -> MetricsReport {
        MetricsReport {
            specificity: 0.9,
            recall: 0.7,
            bac: tbac,
            auc: 0.9,
            ubac,
            rbac,
            tbac,
            mia,
            risks: vec![],
            test_confusion: ConfusionMatrix::default(),
            single_class: false,
            gap: None,
        }
    }

    #[test]
    fn identical_reports_have_zero_gap() {
        let a = report(0.8, 0.9, 0.85, 20.0);
        let g = metric_gap(&a, &a);
        assert_eq!((g.ubac, g.rbac, g.tbac, g.mia, g.mean), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn mia_rescaled_in_mean() {
        let a = report(0.9, 0.9, 0.8, 30.0);
        let b = report(0.8, 0.9, 0.8, 20.0);
        let g = metric_gap(&a, &b);
        assert!((g.ubac - 0.1).abs() < 1e-12);
        assert_eq!(g.mia, 10.0);
        assert!((g.mean - 0.05).abs() < 1e-12);
        assert_eq!(metric_gap(&b, &a), g);
    }
}
