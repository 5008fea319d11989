#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riskunlearn_core::data::{synth_gaussians, SyntheticSpec};
use riskunlearn_core::model::{init_params, MlpConfig};
use riskunlearn_core::{Dataset, ParamVector, Tensor};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Tensor {
    Tensor::matrix(rows, cols, (0..rows * cols).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
}

/// A random MLP no larger than `[8, 16, 2]` with perturbed parameters.
pub fn random_mlp(rng: &mut ChaCha8Rng) -> ParamVector {
    let d = rng.random_range(1..=8);
    let h = rng.random_range(1..=16);
    let cfg = MlpConfig::new(vec![d, h, 2]).unwrap();
    let p = init_params::<f64>(&cfg, rng.random()).unwrap();
    let values = p.values().iter().map(|v| v + rng.random_range(-0.3..0.3)).collect();
    p.with_values(values).unwrap()
}

pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize, k: usize) -> Dataset {
    let x = random_tensor(rng, n, d, 2.0);
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    // Every class present.
    for (c, label) in labels.iter_mut().take(k).enumerate() {
        *label = c;
    }
    Dataset::new(x, labels, k).unwrap()
}

/// `max_i |a_i − f_i| / max(|a_i|, |f_i|, floor)`.
pub fn max_rel_err(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, f)| (a - f).abs() / a.abs().max(f.abs()).max(floor))
        .fold(0.0, f64::max)
}

pub fn blobs(n_per_class: Vec<usize>, gap: f64, scale: f64, flip: f64, seed: u64) -> Dataset {
    let k = n_per_class.len();
    let means = (0..k).map(|c| vec![gap * c as f64, -gap * c as f64]).collect();
    synth_gaussians(&SyntheticSpec {
        n_per_class,
        means,
        scale,
        label_flip_rate: flip,
        seed,
    })
    .unwrap()
}
