use rand::Rng;

use crate::error::{Error, Result};

/// A label drawn uniformly from `{0..k−1} \ {y}`. For `k = 2` this is the
/// deterministic flip and consumes no randomness.
pub fn relabel_random<R: Rng + ?Sized>(y: usize, k: usize, rng: &mut R) -> Result<usize> {
    if k < 2 {
        return Err(Error::Config(format!("random relabeling needs k ≥ 2, got {k}")));
    }
    if y >= k {
        return Err(Error::Contract(format!("label {y} out of range for {k} classes")));
    }
    if k == 2 {
        return Ok(1 - y);
    }
    let r = rng.random_range(0..k - 1);
    Ok(if r >= y { r + 1 } else { r })
}
