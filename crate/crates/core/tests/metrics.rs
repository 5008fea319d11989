mod common;

use common::{random_tensor, rng};
use rand::Rng;

use riskunlearn_core::data::{class_weights, SplitResult};
use riskunlearn_core::metrics::{
    evaluate, global_risk, metric_gap, mia_with, ConfusionMatrix, LossThresholdAttack, MembershipAttack, RiskConfig,
};
use riskunlearn_core::model::{init_params, MlpConfig};
use riskunlearn_core::training::{train, SgdConfig};
use riskunlearn_core::{Dataset, LossSpec, ParamVector};

#[test]
fn risk_spot_values() {
    let cm = ConfusionMatrix { tp: 10, fp: 3, tn: 85, fn_: 2 };
    assert!((global_risk(&cm, &RiskConfig::risk_i(), 100).unwrap() - 0.05).abs() < 1e-15);
    assert!((global_risk(&cm, &RiskConfig::risk_ii(), 100).unwrap() - 0.43).abs() < 1e-15);
    assert!(RiskConfig::new("bad", -1.0, 1.0).is_err());
    assert!(RiskConfig::preset("III").is_none());
}

/// Random features with random labels: anything learned is memorization.
fn noise(r: &mut rand_chacha::ChaCha8Rng, n: usize, d: usize) -> Dataset {
    let x = random_tensor(r, n, d, 1.0);
    let mut y: Vec<usize> = (0..n).map(|_| r.random_range(0..2)).collect();
    y[0] = 0;
    y[1] = 1;
    Dataset::new(x, y, 2).unwrap()
}

fn fit(ds: &Dataset, hidden: usize, epochs: usize, seed: u64) -> ParamVector {
    let theta0 = init_params(&MlpConfig::new(vec![ds.dim(), hidden, 2]).unwrap(), seed).unwrap();
    let sgd = SgdConfig {
        learning_rate: 0.05,
        momentum: 0.9,
        batch_size: 16,
        epochs,
        seed,
    };
    train(&theta0, ds, &sgd, &LossSpec::WeightedCrossEntropy { weights: class_weights(ds).unwrap() }, None).unwrap()
}

#[test]
fn memorized_forget_set_is_detected() {
    let mut r = rng(31);
    for seed in 0..3 {
        let train_set = noise(&mut r, 120, 10);
        let test = noise(&mut r, 120, 10);
        let theta = fit(&train_set, 64, 300, seed);
        let forget = train_set.subset(&(0..30).collect::<Vec<_>>()).unwrap();
        let retain = train_set.subset(&(30..120).collect::<Vec<_>>()).unwrap();
        let res = mia_with(&LossThresholdAttack, &theta, &retain, &test, &forget).unwrap();
        assert!(res.target_member_percent >= 80.0, "seed {seed}: {res:?}");
    }
}

#[test]
fn retrained_model_scores_near_false_positive_rate() {
    let mut r = rng(32);
    let mut diffs = Vec::new();
    for seed in 0..10 {
        let means = [-0.5, 0.5];
        let draw = |r: &mut rand_chacha::ChaCha8Rng, n: usize| {
            let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
            let mut x = random_tensor(r, n, 3, 1.7).into_values();
            for (i, &c) in y.iter().enumerate() {
                for v in &mut x[i * 3..i * 3 + 3] {
                    *v += means[c];
                }
            }
            Dataset::new(riskunlearn_core::Tensor::matrix(n, 3, x).unwrap(), y, 2).unwrap()
        };
        let retain = draw(&mut r, 400);
        let forget = draw(&mut r, 400);
        let test = draw(&mut r, 400);
        let theta = fit(&retain, 16, 30, seed);
        let res = mia_with(&LossThresholdAttack, &theta, &retain, &test, &forget).unwrap();
        diffs.push(res.target_member_percent - res.false_member_percent);
    }
    for (seed, d) in diffs.iter().enumerate() {
        assert!(d.abs() <= 10.0, "seed {seed}: {d}");
    }
}

#[test]
fn attack_handles_degenerate_inputs() {
    assert!(LossThresholdAttack.attack(&[], &[1.0], &[1.0]).is_err());
    assert!(LossThresholdAttack.attack(&[f64::NAN], &[1.0], &[1.0]).is_err());
    // Members all worse than non-members: nobody is called a member.
    let r = LossThresholdAttack.attack(&[5.0, 6.0], &[1.0, 2.0], &[0.0, 9.0]).unwrap();
    assert_eq!(r.target_member_percent, 0.0);
}

#[test]
fn evaluate_and_gap() {
    let mut r = rng(33);
    let train_set = noise(&mut r, 80, 4);
    let test = noise(&mut r, 60, 4);
    let theta = fit(&train_set, 8, 5, 1);
    let split = SplitResult {
        forget: (0..20).collect(),
        retain: (20..80).collect(),
    };
    let report = evaluate(&theta, &train_set, &split, &test, &RiskConfig::defaults(), 1).unwrap();
    assert_eq!(report.bac, (report.specificity + report.recall) / 2.0);
    assert_eq!(report.tbac, report.bac);
    assert!((0.0..=100.0).contains(&report.mia));
    let n = test.len() as f64;
    let cm = report.test_confusion;
    assert_eq!(report.risk("I").unwrap(), (cm.fp + cm.fn_) as f64 / n);
    assert_eq!(report.risk("II").unwrap(), (cm.fp as f64 + 20.0 * cm.fn_ as f64) / n);
    let zero = metric_gap(&report, &report);
    assert_eq!([zero.mean, zero.ubac, zero.rbac, zero.tbac, zero.mia], [0.0; 5]);

    let other = fit(&train_set, 8, 1, 2);
    let other_report = evaluate(&other, &train_set, &split, &test, &RiskConfig::defaults(), 1).unwrap();
    let g = metric_gap(&other_report, &report);
    assert_eq!(g.ubac, (other_report.ubac - report.ubac).abs());
    assert!((g.mean - (g.ubac + g.rbac + g.tbac + g.mia / 100.0) / 4.0).abs() < 1e-15);
    assert_eq!(g, metric_gap(&report, &other_report));
}
