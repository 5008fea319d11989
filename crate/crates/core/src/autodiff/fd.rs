//! Central finite differences, used as an independent gradient oracle.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `(f(θ+εe_i) − f(θ−εe_i)) / (2ε)` for every coordinate `i`.
pub fn finite_difference_gradient<T, F>(mut f: F, theta: &[T], eps: T) -> Result<Vec<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<T>,
{
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(Error::Contract(format!("step must be positive and finite, got {eps}")));
    }
    let mut probe = theta.to_vec();
    let mut eval = |p: &[T], i: usize, side: &str| -> Result<T> {
        let v = f(p)?;
        if !v.is_finite() {
            return Err(Error::Evaluation(format!(
                "non-finite objective {v} at coordinate {i} ({side} probe)"
            )));
        }
        Ok(v)
    };
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let orig = probe[i];
        probe[i] = orig + eps;
        let plus = eval(&probe, i, "+")?;
        probe[i] = orig - eps;
        let minus = eval(&probe, i, "-")?;
        probe[i] = orig;
        grad.push((plus - minus) / (eps + eps));
    }
    Ok(grad)
}
