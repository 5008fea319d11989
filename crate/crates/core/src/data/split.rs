use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub forget_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(forget_fraction: f64, seed: u64) -> Result<Self> {
        let spec = Self { forget_fraction, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.forget_fraction > 0.0 && self.forget_fraction < 1.0) {
            return Err(Error::Config(format!(
                "forget fraction must lie in (0, 1), got {}",
                self.forget_fraction
            )));
        }
        Ok(())
    }
}

/// Disjoint, sorted forget/retain index sets covering `0..N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitResult {
    pub forget: Vec<usize>,
    pub retain: Vec<usize>,
}

/// Per-class forget quotas: `round(N_c·f)`, then corrected one unit at a time
/// by largest remainder until they sum to `round(N·f)`.
pub(crate) fn forget_quotas(counts: &[usize], fraction: f64) -> Vec<usize> {
    let n: usize = counts.iter().sum();
    let total = (n as f64 * fraction).round() as usize;
    let exact: Vec<f64> = counts.iter().map(|&c| c as f64 * fraction).collect();
    let mut quota: Vec<usize> = exact.iter().map(|q| q.round() as usize).collect();
    let remainder = |c: usize, q: &[usize]| exact[c] - q[c] as f64;

    let mut assigned: usize = quota.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    if assigned < total {
        order.sort_by(|&a, &b| remainder(b, &quota).total_cmp(&remainder(a, &quota)).then(a.cmp(&b)));
        for &c in order.iter().cycle().take(counts.len() * 2) {
            if assigned == total {
                break;
            }
            if quota[c] < counts[c] {
                quota[c] += 1;
                assigned += 1;
            }
        }
    } else if assigned > total {
        order.sort_by(|&a, &b| remainder(a, &quota).total_cmp(&remainder(b, &quota)).then(a.cmp(&b)));
        for &c in order.iter().cycle().take(counts.len() * 2) {
            if assigned == total {
                break;
            }
            if quota[c] > 0 {
                quota[c] -= 1;
                assigned -= 1;
            }
        }
    }
    quota
}

/// Class-proportional forget/retain partition, uniformly random within class.
pub fn balanced_split<T: Scalar>(ds: &Dataset<T>, spec: &SplitSpec) -> Result<SplitResult> {
    spec.validate()?;
    let k = ds.num_classes();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &y) in ds.labels().iter().enumerate() {
        by_class[y].push(i);
    }
    let counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let quotas = forget_quotas(&counts, spec.forget_fraction);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut forget = Vec::new();
    for (members, &q) in by_class.iter_mut().zip(&quotas) {
        members.shuffle(&mut rng);
        forget.extend_from_slice(&members[..q]);
    }
    forget.sort_unstable();
    let mut is_forget = vec![false; ds.len()];
    for &i in &forget {
        is_forget[i] = true;
    }
    let retain = (0..ds.len()).filter(|&i| !is_forget[i]).collect();
    Ok(SplitResult { forget, retain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tensor;

    fn ds(counts: &[usize]) -> Dataset<f64> {
        let labels: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
            .collect();
        let n = labels.len();
        Dataset::new(Tensor::matrix(n, 1, vec![0.0; n]).unwrap(), labels, counts.len()).unwrap()
    }

    #[test]
    fn exact_proportionality() {
        let d = ds(&[80, 20]);
        let s = balanced_split(&d, &SplitSpec::new(0.2, 1).unwrap()).unwrap();
        let per_class = |c| s.forget.iter().filter(|&&i| d.labels()[i] == c).count();
        assert_eq!((per_class(0), per_class(1)), (16, 4));
        assert_eq!(s.forget.len() + s.retain.len(), 100);
    }

    #[test]
    fn half_of_odd_classes_hits_global_total() {
        // 5 + 5 samples at 0.5: both round up to 3, corrected down to a total of 5.
        assert_eq!(forget_quotas(&[5, 5], 0.5), vec![2, 3]);
        assert_eq!(forget_quotas(&[5, 4], 0.5), vec![3, 2]);
        assert_eq!(forget_quotas(&[5], 0.5).iter().sum::<usize>(), 3);
        let q = forget_quotas(&[5, 5, 5], 0.5);
        assert_eq!(q.iter().sum::<usize>(), 8);
        assert!(q.iter().all(|&x| x == 2 || x == 3));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let d = ds(&[40, 30, 30]);
        let a = balanced_split(&d, &SplitSpec::new(0.5, 7).unwrap()).unwrap();
        let b = balanced_split(&d, &SplitSpec::new(0.5, 7).unwrap()).unwrap();
        let c = balanced_split(&d, &SplitSpec::new(0.5, 8).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn fraction_bounds() {
        assert!(SplitSpec::new(0.0, 0).is_err());
        assert!(SplitSpec::new(1.0, 0).is_err());
        assert!(SplitSpec::new(f64::NAN, 0).is_err());
    }
}
