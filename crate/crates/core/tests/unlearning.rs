mod common;

use common::{blobs, rng};
use rand::Rng;

use riskunlearn_core::autodiff::{ops, GradRecord};
use riskunlearn_core::data::{balanced_split, class_weights, SplitResult, SplitSpec};
use riskunlearn_core::model::{init_params, MlpConfig};
use riskunlearn_core::training::{loss_and_gradient, sgd_step, train, SgdConfig};
use riskunlearn_core::unlearn::{
    compute_saliency_mask, cra_epoch_batching, unlearn, unlearn_with_mask, CraObjective, Method, SaliencyMask,
    UnlearnConfig,
};
use riskunlearn_core::{Dataset, Error, LossSpec, ParamVector, Tensor};

fn setup(seed: u64) -> (ParamVector, Dataset, SplitResult) {
    let ds = blobs(vec![60, 20], 1.5, 1.0, 0.1, seed);
    let theta0 = init_params(&MlpConfig::new(vec![2, 8, 2]).unwrap(), seed).unwrap();
    let weights = class_weights(&ds).unwrap();
    let sgd = SgdConfig {
        learning_rate: 0.05,
        momentum: 0.9,
        batch_size: 16,
        epochs: 10,
        seed,
    };
    let theta_o = train(&theta0, &ds, &sgd, &LossSpec::WeightedCrossEntropy { weights }, None).unwrap();
    let split = balanced_split(&ds, &SplitSpec::new(0.2, seed).unwrap()).unwrap();
    (theta_o, ds, split)
}

fn cfg(method: Method, seed: u64) -> UnlearnConfig {
    UnlearnConfig::new(
        method,
        SgdConfig {
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 8,
            epochs: 3,
            seed: 0,
        },
        seed,
    )
}

#[test]
fn masked_parameters_are_untouched_by_saliency_methods() {
    let (theta_o, ds, split) = setup(1);
    let mut r = rng(21);
    for trial in 0..50 {
        let bits: Vec<bool> = (0..theta_o.len()).map(|_| r.random_bool(0.5)).collect();
        let mask = SaliencyMask::from_bits(bits.clone());
        let method = if trial % 2 == 0 { Method::Salun } else { Method::SalunCra };
        let out = unlearn_with_mask(&theta_o, &ds, &split, &cfg(method, trial), Some(&mask)).unwrap();
        for (i, &on) in bits.iter().enumerate() {
            if !on {
                assert_eq!(out.values()[i].to_bits(), theta_o.values()[i].to_bits());
            }
        }
    }
}

#[test]
fn computed_mask_freezes_half() {
    let (theta_o, ds, split) = setup(2);
    let mask = compute_saliency_mask(&theta_o, &ds, &split.forget).unwrap();
    assert!(mask.selected() * 2 >= mask.len());
    let out = unlearn(&theta_o, &ds, &split, &cfg(Method::SalunCra, 4)).unwrap();
    for i in 0..mask.len() {
        if !mask.get(i) {
            assert_eq!(out.values()[i].to_bits(), theta_o.values()[i].to_bits());
        }
    }
}

/// The recorded composite equals the sum of its three terms computed separately.
#[test]
fn composite_batches_equal_separate_terms() {
    let (theta_o, ds, split) = setup(3);
    let (entropy, relabeled): (Vec<usize>, Vec<usize>) = split.forget.iter().partition(|&&i| ds.labels()[i] == 1);
    let random: Vec<usize> = relabeled.iter().map(|&i| 1 - ds.labels()[i]).collect();
    let retain_ds = ds.subset(&split.retain).unwrap();
    let weights = class_weights(&retain_ds).unwrap();
    let alpha = 0.7;
    let obj = CraObjective::new(&ds, entropy.clone(), relabeled.clone(), random.clone(), split.retain.clone(), weights.clone(), alpha)
        .unwrap();
    for triple in cra_epoch_batching(obj.set_sizes(), 8, 5, 1) {
        let (loss, grad) = obj.batch_loss_and_gradient(&theta_o, &triple).unwrap();
        let mut expect_loss = 0.0;
        let mut expect_grad = vec![0.0; theta_o.len()];
        let mut add = |l: f64, g: Vec<f64>, c: f64| {
            expect_loss += c * l;
            for (e, v) in expect_grad.iter_mut().zip(g) {
                *e += c * v;
            }
        };
        if !triple.entropy.is_empty() {
            let idx: Vec<usize> = triple.entropy.iter().map(|&p| entropy[p]).collect();
            let (l, g) = loss_and_gradient(&theta_o, &ds.subset(&idx).unwrap(), &LossSpec::NegativeEntropy).unwrap();
            add(l, g, 1.0);
        }
        if !triple.relabeled.is_empty() {
            let idx: Vec<usize> = triple.relabeled.iter().map(|&p| relabeled[p]).collect();
            let labels = triple.relabeled.iter().map(|&p| random[p]).collect();
            let sub = ds.subset(&idx).unwrap().relabeled(labels).unwrap();
            let (l, g) = loss_and_gradient(&theta_o, &sub, &LossSpec::CrossEntropy).unwrap();
            add(l, g, 1.0);
        }
        if !triple.retain.is_empty() {
            let idx: Vec<usize> = triple.retain.iter().map(|&p| split.retain[p]).collect();
            let loss = LossSpec::WeightedCrossEntropy { weights: weights.clone() };
            let (l, g) = loss_and_gradient(&theta_o, &ds.subset(&idx).unwrap(), &loss).unwrap();
            add(l, g, alpha);
        }
        assert!((loss - expect_loss).abs() < 1e-12);
        for (a, b) in grad.iter().zip(&expect_grad) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

/// Steps of `lr = 0.1` updates on `−H(softmax(z))` until every probability is
/// within `1e-3` of uniform.
fn steps_to_uniform(mut z: Vec<f64>, momentum: f64) -> Option<usize> {
    let k = z.len();
    let sgd = SgdConfig {
        learning_rate: 0.1,
        momentum,
        batch_size: 1,
        epochs: 1,
        seed: 0,
    };
    let mut v = vec![0.0; k];
    for step in 1..=500 {
        let mut rec = GradRecord::new(k);
        let zv = rec.param(Tensor::matrix(1, k, z.clone()).unwrap(), 0).unwrap();
        let h = rec.softmax_entropy(zv).unwrap();
        let loss = rec.scale(h, -1.0);
        let g = rec.backward(loss).unwrap();
        (z, v) = sgd_step(&z, &g, &v, &sgd, None).unwrap();
        let p = ops::softmax(&Tensor::matrix(1, k, z.clone()).unwrap()).unwrap();
        if p.values().iter().all(|&pc| (pc - 1.0 / k as f64).abs() < 1e-3) {
            return Some(step);
        }
    }
    None
}

#[test]
fn entropy_ascent_drives_free_logits_to_uniform() {
    let mut r = rng(22);
    for k in [2usize, 3] {
        for _ in 0..10 {
            let z: Vec<f64> = (0..k).map(|_| r.random_range(-3.0..3.0)).collect();
            assert!(steps_to_uniform(z, 0.0).is_some(), "K={k}");
        }
    }
    for k in [2usize, 3, 5, 10] {
        for _ in 0..10 {
            let z: Vec<f64> = (0..k).map(|_| r.random_range(-3.0..3.0)).collect();
            assert!(steps_to_uniform(z, 0.9).is_some(), "K={k} with momentum");
        }
    }
}

#[test]
fn salun_and_cra_coincide_without_malignant_forget_samples() {
    let (theta_o, ds, _) = setup(4);
    let benign: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels()[i] == 0).collect();
    let forget: Vec<usize> = benign[..10].to_vec();
    let retain: Vec<usize> = (0..ds.len()).filter(|i| !forget.contains(i)).collect();
    let split = SplitResult { forget, retain };
    let a = unlearn(&theta_o, &ds, &split, &cfg(Method::Salun, 7)).unwrap();
    let b = unlearn(&theta_o, &ds, &split, &cfg(Method::SalunCra, 7)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cra_differs_when_malignant_samples_are_forgotten() {
    let (theta_o, ds, split) = setup(5);
    assert!(split.forget.iter().any(|&i| ds.labels()[i] == 1));
    let a = unlearn(&theta_o, &ds, &split, &cfg(Method::Salun, 7)).unwrap();
    let b = unlearn(&theta_o, &ds, &split, &cfg(Method::SalunCra, 7)).unwrap();
    assert_ne!(a, b);
}

#[test]
fn retrain_ignores_the_original_model() {
    let (theta_o, ds, split) = setup(6);
    let other = init_params(theta_o.config(), 999).unwrap();
    let a = unlearn(&theta_o, &ds, &split, &cfg(Method::Retrain, 3)).unwrap();
    let b = unlearn(&other, &ds, &split, &cfg(Method::Retrain, 3)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn every_method_is_deterministic_and_moves_parameters() {
    let (theta_o, ds, split) = setup(7);
    for m in Method::ALL {
        let a = unlearn(&theta_o, &ds, &split, &cfg(m, 11)).unwrap();
        let b = unlearn(&theta_o, &ds, &split, &cfg(m, 11)).unwrap();
        assert_eq!(a, b, "{m}");
        assert_ne!(a, theta_o, "{m}");
        assert!(a.values().iter().all(|v| v.is_finite()));
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let (theta_o, ds, split) = setup(8);
    let empty = SplitResult {
        forget: vec![],
        retain: (0..ds.len()).collect(),
    };
    for m in [Method::RandomLabel, Method::Salun, Method::SalunCra] {
        assert!(matches!(unlearn(&theta_o, &ds, &empty, &cfg(m, 0)), Err(Error::UnlearnInput(_))));
    }
    let overlap = SplitResult {
        forget: vec![0, 1],
        retain: (1..ds.len()).collect(),
    };
    assert!(unlearn(&theta_o, &ds, &overlap, &cfg(Method::FineTune, 0)).is_err());
    let mut bad = cfg(Method::SalunCra, 0);
    bad.malignant_class = 2;
    assert!(unlearn(&theta_o, &ds, &split, &bad).is_err());
    let mut bad = cfg(Method::Salun, 0);
    bad.alpha = -1.0;
    assert!(unlearn(&theta_o, &ds, &split, &bad).is_err());
    assert!("salun-cra".parse::<Method>().is_err());
    assert_eq!("salun_cra".parse::<Method>().unwrap(), Method::SalunCra);
}
