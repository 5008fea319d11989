use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Isotropic Gaussian blobs, one per class, with optional symmetric label noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Samples drawn from each class's blob.
    pub n_per_class: Vec<usize>,
    /// Blob centres; all of the same dimension.
    pub means: Vec<Vec<f64>>,
    /// Standard deviation of every coordinate.
    pub scale: f64,
    /// Probability that a sample's label is replaced by a different class.
    #[serde(default)]
    pub label_flip_rate: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let k = self.means.len();
        if k < 2 {
            return Err(Error::Config("synthetic data needs at least 2 classes".into()));
        }
        if self.n_per_class.len() != k {
            return Err(Error::Config(format!(
                "{} class sizes for {k} means",
                self.n_per_class.len()
            )));
        }
        if self.n_per_class.iter().sum::<usize>() == 0 {
            return Err(Error::Config("synthetic data needs at least one sample".into()));
        }
        let d = self.means[0].len();
        if d == 0 || self.means.iter().any(|m| m.len() != d) {
            return Err(Error::Config("class means must share a positive dimension".into()));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!("scale must be positive, got {}", self.scale)));
        }
        if !(0.0..0.5).contains(&self.label_flip_rate) {
            return Err(Error::Config(format!(
                "label flip rate must lie in [0, 0.5), got {}",
                self.label_flip_rate
            )));
        }
        Ok(())
    }
}

/// Samples are emitted class by class in class order.
pub fn synth_gaussians<T: Scalar>(spec: &SyntheticSpec) -> Result<Dataset<T>> {
    spec.validate()?;
    let k = spec.means.len();
    let d = spec.means[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n: usize = spec.n_per_class.iter().sum();
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for (c, (&count, mean)) in spec.n_per_class.iter().zip(&spec.means).enumerate() {
        for _ in 0..count {
            for &mu in mean {
                let z: f64 = rng.sample(StandardNormal);
                features.push(T::of(mu + spec.scale * z));
            }
            let flip = spec.label_flip_rate > 0.0 && rng.random::<f64>() < spec.label_flip_rate;
            labels.push(if flip {
                let r = rng.random_range(0..k - 1);
                if r >= c {
                    r + 1
                } else {
                    r
                }
            } else {
                c
            });
        }
    }
    Dataset::new(Tensor::matrix(n, d, features)?, labels, k)
}
