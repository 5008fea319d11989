use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::unlearn::SaliencyMask;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl SgdConfig {
    /// Desk-scale baseline recipe: 100 epochs, lr 0.1, momentum 0.9, batch 64.
    pub fn baseline(seed: u64) -> Self {
        Self {
            learning_rate: 0.1,
            momentum: 0.9,
            batch_size: 64,
            epochs: 100,
            seed,
        }
    }

    /// Desk-scale unlearning recipe: 10 epochs, lr 0.01, momentum 0.9, batch 64.
    pub fn unlearning(seed: u64) -> Self {
        Self {
            learning_rate: 0.01,
            epochs: 10,
            ..Self::baseline(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be finite and > 0, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// In-place momentum step: `v ← μ·v + g`, `θ ← θ − lr·v` on unmasked entries.
/// Entries with mask bit 0 keep both `θ` and `v` unchanged.
pub fn sgd_step_in_place<T: Scalar>(
    theta: &mut [T],
    grad: &[T],
    velocity: &mut [T],
    config: &SgdConfig,
    mask: Option<&SaliencyMask>,
) -> Result<()> {
    let n = theta.len();
    if grad.len() != n || velocity.len() != n || mask.is_some_and(|m| m.len() != n) {
        return Err(Error::Shape(format!(
            "step arrays disagree: θ {n}, g {}, v {}, mask {:?}",
            grad.len(),
            velocity.len(),
            mask.map(SaliencyMask::len)
        )));
    }
    let lr = T::of(config.learning_rate);
    let mu = T::of(config.momentum);
    for i in 0..n {
        if mask.is_some_and(|m| !m.get(i)) {
            continue;
        }
        velocity[i] = mu * velocity[i] + grad[i];
        theta[i] -= lr * velocity[i];
    }
    Ok(())
}

/// Pure form of [`sgd_step_in_place`]; returns `(θ', v')`.
pub fn sgd_step<T: Scalar>(
    theta: &[T],
    grad: &[T],
    velocity: &[T],
    config: &SgdConfig,
    mask: Option<&SaliencyMask>,
) -> Result<(Vec<T>, Vec<T>)> {
    let mut t = theta.to_vec();
    let mut v = velocity.to_vec();
    sgd_step_in_place(&mut t, grad, &mut v, config, mask)?;
    Ok((t, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(lr: f64, mu: f64) -> SgdConfig {
        SgdConfig {
            learning_rate: lr,
            momentum: mu,
            batch_size: 1,
            epochs: 1,
            seed: 0,
        }
    }

    #[test]
    fn plain_step() {
        let (t, _) = sgd_step(&[0.0], &[1.0], &[0.0], &cfg(0.1, 0.0), None).unwrap();
        assert_eq!(t, vec![-0.1]);
    }

    #[test]
    fn momentum_recurrence() {
        let c = cfg(0.1, 0.9);
        let (t, v) = sgd_step(&[0.0f64], &[1.0], &[0.0], &c, None).unwrap();
        let (t, _) = sgd_step(&t, &[1.0], &v, &c, None).unwrap();
        assert!((t[0] - -0.29).abs() < 1e-15);
    }

    #[test]
    fn zero_mask_is_frozen() {
        let theta = [0.3, -1.7];
        let vel = [0.25, -0.125];
        let mask = SaliencyMask::from_bits(vec![false, false]);
        let (t, v) = sgd_step(&theta, &[5.0, 5.0], &vel, &cfg(0.1, 0.9), Some(&mask)).unwrap();
        assert_eq!(t, theta);
        assert_eq!(v, vel);
    }

    #[test]
    fn partial_mask() {
        let mask = SaliencyMask::from_bits(vec![true, false]);
        let (t, v) = sgd_step(&[0.0, 0.0], &[1.0, 1.0], &[0.0, 0.0], &cfg(0.5, 0.0), Some(&mask)).unwrap();
        assert_eq!(t, vec![-0.5, 0.0]);
        assert_eq!(v, vec![1.0, 0.0]);
    }

    #[test]
    fn length_mismatch() {
        assert!(sgd_step(&[0.0], &[1.0, 2.0], &[0.0], &cfg(0.1, 0.0), None).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0.1, 1.0).validate().is_err());
        assert!(cfg(-0.1, 0.0).validate().is_err());
        assert!(SgdConfig { batch_size: 0, ..cfg(0.1, 0.0) }.validate().is_err());
        assert!(SgdConfig::unlearning(0).validate().is_ok());
    }
}
