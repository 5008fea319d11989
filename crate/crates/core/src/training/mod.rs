//! Losses and mini-batch SGD with momentum and an optional update mask.

mod loss;
mod sgd;

pub use loss::{entropy_loss, weighted_cross_entropy, LossSpec};
pub use sgd::{sgd_step, sgd_step_in_place, SgdConfig};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{GradRecord, Var};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{ParamVector, RecordedModel};
use crate::scalar::Scalar;
use crate::unlearn::SaliencyMask;

/// Generator for the shuffle of one epoch of one sample stream.
///
/// Streams with different `tag`s are independent; the epoch selects the
/// ChaCha stream so an epoch's order never depends on how many draws earlier
/// epochs made.
pub(crate) fn epoch_rng(seed: u64, tag: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(epoch as u64);
    rng
}

/// Shuffled `0..n` cut into consecutive batches; the last may be short.
pub(crate) fn shuffled_batches(n: usize, batch_size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.chunks(batch_size).map(<[usize]>::to_vec).collect()
}

/// Generic SGD loop. `epoch_batches(e)` yields the batches of epoch `e`;
/// `batch_loss` records the scalar loss of one batch (or `None` to skip it).
pub(crate) fn optimize<T, B, E, L>(
    theta0: &ParamVector<T>,
    sgd: &SgdConfig,
    mask: Option<&SaliencyMask>,
    mut epoch_batches: E,
    mut batch_loss: L,
) -> Result<ParamVector<T>>
where
    T: Scalar,
    E: FnMut(usize) -> Result<Vec<B>>,
    L: FnMut(&mut GradRecord<T>, &RecordedModel, &B) -> Result<Option<Var>>,
{
    sgd.validate()?;
    if let Some(m) = mask {
        if m.len() != theta0.len() {
            return Err(Error::Shape(format!(
                "mask has {} entries for {} parameters",
                m.len(),
                theta0.len()
            )));
        }
    }
    let mut theta = theta0.values().to_vec();
    let mut velocity = vec![T::zero(); theta.len()];
    for epoch in 0..sgd.epochs {
        for batch in epoch_batches(epoch)? {
            let current = theta0.with_values(theta.clone())?;
            let mut rec = GradRecord::new(theta.len());
            let model = RecordedModel::register(&mut rec, &current)?;
            let Some(loss) = batch_loss(&mut rec, &model, &batch)? else {
                continue;
            };
            let grad = rec.backward(loss)?;
            sgd_step_in_place(&mut theta, &grad, &mut velocity, sgd, mask)?;
        }
    }
    theta0.with_values(theta)
}

/// Records the loss of `loss` over the rows `indices` of `ds`.
pub(crate) fn record_loss<T: Scalar>(
    rec: &mut GradRecord<T>,
    model: &RecordedModel,
    ds: &Dataset<T>,
    indices: &[usize],
    loss: &LossSpec<T>,
) -> Result<Var> {
    let x = ds.features().select_rows(indices)?;
    let labels: Vec<usize> = indices.iter().map(|&i| ds.labels()[i]).collect();
    let logits = model.logits(rec, x)?;
    match loss {
        LossSpec::WeightedCrossEntropy { weights } => rec.softmax_cross_entropy(logits, &labels, weights),
        LossSpec::CrossEntropy => {
            let ones = vec![T::one(); ds.num_classes()];
            rec.softmax_cross_entropy(logits, &labels, &ones)
        }
        LossSpec::NegativeEntropy => {
            let h = rec.softmax_entropy(logits)?;
            Ok(rec.scale(h, -T::one()))
        }
        LossSpec::CraComposite { .. } => Err(Error::Config(
            "the composite CRA objective spans three sample sets; it is driven by the unlearning module".into(),
        )),
    }
}

/// Loss value and its gradient over all of `ds` (full batch).
pub fn loss_and_gradient<T: Scalar>(
    params: &ParamVector<T>,
    ds: &Dataset<T>,
    loss: &LossSpec<T>,
) -> Result<(T, Vec<T>)> {
    loss.validate(ds.num_classes())?;
    let mut rec = GradRecord::new(params.len());
    let model = RecordedModel::register(&mut rec, params)?;
    let all: Vec<usize> = (0..ds.len()).collect();
    let l = record_loss(&mut rec, &model, ds, &all, loss)?;
    let value = rec.value(l).item().expect("losses are scalar");
    Ok((value, rec.backward(l)?))
}

/// The training algorithm: seeded per-epoch shuffle, sequential mini-batches
/// (short last batch kept), one masked momentum step per batch.
pub fn train<T: Scalar>(
    theta0: &ParamVector<T>,
    ds: &Dataset<T>,
    sgd: &SgdConfig,
    loss: &LossSpec<T>,
    mask: Option<&SaliencyMask>,
) -> Result<ParamVector<T>> {
    if ds.is_empty() {
        return Err(Error::Contract("cannot train on an empty dataset".into()));
    }
    if ds.dim() != theta0.config().input_dim() || ds.num_classes() != theta0.config().num_classes() {
        return Err(Error::Shape(format!(
            "dataset (d={}, K={}) does not fit model {:?}",
            ds.dim(),
            ds.num_classes(),
            theta0.config().layer_sizes
        )));
    }
    loss.validate(ds.num_classes())?;
    if matches!(loss, LossSpec::CraComposite { .. }) {
        return Err(Error::Config(
            "the composite CRA objective needs separate forget/retain sets".into(),
        ));
    }
    const STREAM: u64 = 0;
    optimize(
        theta0,
        sgd,
        mask,
        |epoch| {
            let mut rng = epoch_rng(sgd.seed, STREAM, epoch);
            Ok(shuffled_batches(ds.len(), sgd.batch_size, &mut rng))
        },
        |rec, model, batch: &Vec<usize>| record_loss(rec, model, ds, batch, loss).map(Some),
    )
}
