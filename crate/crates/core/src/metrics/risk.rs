use serde::{Deserialize, Serialize};

use super::ConfusionMatrix;
use crate::error::{Error, Result};

/// Misclassification costs of the cost-weighted error rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskConfig {
    pub name: String,
    pub c_fp: f64,
    pub c_fn: f64,
}

impl RiskConfig {
    pub fn new(name: impl Into<String>, c_fp: f64, c_fn: f64) -> Result<Self> {
        let r = Self {
            name: name.into(),
            c_fp,
            c_fn,
        };
        r.validate()?;
        Ok(r)
    }

    /// Equal costs: the plain error rate.
    pub fn risk_i() -> Self {
        Self::new("I", 1.0, 1.0).expect("preset is valid")
    }

    /// Missed malignancies cost 20 false alarms.
    pub fn risk_ii() -> Self {
        Self::new("II", 1.0, 20.0).expect("preset is valid")
    }

    pub fn defaults() -> Vec<Self> {
        vec![Self::risk_i(), Self::risk_ii()]
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "I" => Some(Self::risk_i()),
            "II" => Some(Self::risk_ii()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |c: f64| c >= 0.0 && c.is_finite();
        if !ok(self.c_fp) || !ok(self.c_fn) {
            return Err(Error::Config(format!(
                "risk `{}`: costs must be finite and ≥ 0",
                self.name
            )));
        }
        if self.c_fp == 0.0 && self.c_fn == 0.0 {
            return Err(Error::Config(format!("risk `{}`: costs cannot both be zero", self.name)));
        }
        Ok(())
    }
}

/// `(c_fp·FP + c_fn·FN) / N`.
pub fn global_risk(cm: &ConfusionMatrix, risk: &RiskConfig, n: usize) -> Result<f64> {
    risk.validate()?;
    if n != cm.total() || n == 0 {
        return Err(Error::Metric(format!(
            "risk normalizer {n} does not match the {} evaluated samples",
            cm.total()
        )));
    }
    Ok((risk.c_fp * cm.fp as f64 + risk.c_fn * cm.fn_ as f64) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(fp: usize, fn_: usize, n: usize) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: 0,
            fp,
            tn: n - fp - fn_,
            fn_,
        }
    }

    #[test]
    fn presets() {
        let m = cm(3, 2, 100);
        assert_eq!(global_risk(&m, &RiskConfig::risk_ii(), 100).unwrap(), 0.43);
        assert_eq!(global_risk(&m, &RiskConfig::risk_i(), 100).unwrap(), 0.05);
    }

    #[test]
    fn zero_errors() {
        for r in RiskConfig::defaults() {
            assert_eq!(global_risk(&cm(0, 0, 10), &r, 10).unwrap(), 0.0);
        }
    }

    #[test]
    fn invalid() {
        assert!(RiskConfig::new("z", 0.0, 0.0).is_err());
        assert!(RiskConfig::new("n", -1.0, 1.0).is_err());
        assert!(global_risk(&cm(1, 1, 10), &RiskConfig::risk_i(), 11).is_err());
    }
}
