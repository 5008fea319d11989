//! Utility, unlearning and clinical-risk metrics.

mod auc;
mod confusion;
mod mia;
mod report;
mod risk;

pub use auc::auc;
pub use confusion::{balanced_accuracy, confusion_matrix, recall, specificity, BalancedAccuracy, ConfusionMatrix};
pub use mia::{mia_score, mia_with, sample_losses, LossThresholdAttack, MembershipAttack, MiaResult};
pub use report::{evaluate, metric_gap, set_bac, GapReport, MetricsReport, RiskValue};
pub use risk::{global_risk, RiskConfig};
