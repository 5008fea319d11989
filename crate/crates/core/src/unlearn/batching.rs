use rand::seq::SliceRandom;

use crate::training::epoch_rng;

/// Stream tags; each set is shuffled from its own generator.
pub(crate) const TAG_ENTROPY: u64 = 0x11;
pub(crate) const TAG_RELABELED: u64 = 0x12;
pub(crate) const TAG_RETAIN: u64 = 0x13;
pub(crate) const TAG_LABELS: u64 = 0x14;

/// Positions (within their own set) drawn for one optimization step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BatchTriple {
    /// Malignant forget samples (entropy term).
    pub entropy: Vec<usize>,
    /// Relabeled forget samples (cross-entropy on the random labels).
    pub relabeled: Vec<usize>,
    /// Retain samples (weighted cross-entropy).
    pub retain: Vec<usize>,
}

impl BatchTriple {
    pub fn is_empty(&self) -> bool {
        self.entropy.is_empty() && self.relabeled.is_empty() && self.retain.is_empty()
    }
}

/// One epoch of aligned batches over three sets of the given sizes.
///
/// The step count is the largest `ceil(size / batch_size)` among the sets.
/// Each set is shuffled independently and cut into that many contiguous,
/// near-equal chunks, so every sample of every set is used exactly once per
/// epoch and no chunk exceeds `batch_size`. Small sets may leave some chunks
/// empty; the corresponding term is then absent from that step.
pub fn cra_epoch_batching(
    sizes: [usize; 3],
    batch_size: usize,
    seed: u64,
    epoch: usize,
) -> Vec<BatchTriple> {
    let batch_size = batch_size.max(1);
    let steps = sizes.iter().map(|&n| n.div_ceil(batch_size)).max().unwrap_or(0);
    if steps == 0 {
        return Vec::new();
    }
    let chunks = |n: usize, tag: u64| -> Vec<Vec<usize>> {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut epoch_rng(seed, tag, epoch));
        (0..steps).map(|j| order[j * n / steps..(j + 1) * n / steps].to_vec()).collect()
    };
    let e = chunks(sizes[0], TAG_ENTROPY);
    let f = chunks(sizes[1], TAG_RELABELED);
    let r = chunks(sizes[2], TAG_RETAIN);
    e.into_iter()
        .zip(f)
        .zip(r)
        .map(|((entropy, relabeled), retain)| BatchTriple {
            entropy,
            relabeled,
            retain,
        })
        .collect()
}
