//! Forward kernels shared by the recorded and the plain evaluation paths.
//!
//! Both paths call the same functions so a recorded forward pass is
//! bit-identical to an unrecorded one.

use super::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `out[i][j] = Σ_m x[i][m]·W[m][j] + b[j]`.
pub fn affine_forward<T: Scalar>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    if !x.is_matrix() || !w.is_matrix() {
        return Err(Error::Shape(format!(
            "affine expects matrices, got x{:?} W{:?}",
            x.shape(),
            w.shape()
        )));
    }
    let (n, d) = (x.rows(), x.cols());
    if w.rows() != d {
        return Err(Error::Shape(format!(
            "inner dimensions disagree: x is {n}×{d}, W is {}×{}",
            w.rows(),
            w.cols()
        )));
    }
    let k = w.cols();
    if b.len() != k {
        return Err(Error::Shape(format!("bias has {} entries, W has {k} columns", b.len())));
    }
    Ok(Tensor::matrix(n, k, affine_kernel(x.values(), n, d, w.values(), b.values(), k))
        .expect("affine output shape is consistent"))
}

pub(crate) fn affine_kernel<T: Scalar>(x: &[T], n: usize, d: usize, w: &[T], b: &[T], k: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n * k);
    for i in 0..n {
        let xi = &x[i * d..(i + 1) * d];
        for j in 0..k {
            let mut acc = T::zero();
            for m in 0..d {
                acc += xi[m] * w[m * k + j];
            }
            out.push(acc + b[j]);
        }
    }
    out
}

pub fn relu<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| if v > T::zero() { v } else { T::zero() })
}

fn require_rows<T: Scalar>(logits: &Tensor<T>, what: &str) -> Result<()> {
    if !logits.is_matrix() {
        return Err(Error::Shape(format!("{what} expects an n×K matrix, got {:?}", logits.shape())));
    }
    Ok(())
}

/// Row-wise `log Σ exp`, stabilized by the row maximum.
fn row_logsumexp<T: Scalar>(row: &[T]) -> (T, T) {
    let max = row.iter().copied().fold(T::neg_infinity(), T::max);
    let sum: T = row.iter().map(|&z| (z - max).exp()).sum();
    (max, sum.ln())
}

/// Row-wise softmax with max subtraction.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Result<Tensor<T>> {
    require_rows(logits, "softmax")?;
    if logits.cols() < 2 {
        return Err(Error::Shape("softmax needs at least 2 classes".into()));
    }
    let mut out = Vec::with_capacity(logits.len());
    for i in 0..logits.rows() {
        let row = logits.row(i);
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let exps: Vec<T> = row.iter().map(|&z| (z - max).exp()).collect();
        let total: T = exps.iter().copied().sum();
        out.extend(exps.into_iter().map(|e| e / total));
    }
    Tensor::new(logits.shape().to_vec(), out)
}

/// Row-wise `z − logsumexp(z)`; finite for finite logits.
pub fn log_softmax<T: Scalar>(logits: &Tensor<T>) -> Result<Tensor<T>> {
    require_rows(logits, "log_softmax")?;
    let mut out = Vec::with_capacity(logits.len());
    for i in 0..logits.rows() {
        let row = logits.row(i);
        let (max, lse) = row_logsumexp(row);
        out.extend(row.iter().map(|&z| (z - max) - lse));
    }
    Tensor::new(logits.shape().to_vec(), out)
}

/// Per-sample weighted cross-entropy terms `w_y · (−log p_y)` from logits.
pub fn cross_entropy_terms<T: Scalar>(logits: &Tensor<T>, labels: &[usize], weights: &[T]) -> Result<Vec<T>> {
    require_rows(logits, "cross_entropy")?;
    let k = logits.cols();
    if labels.len() != logits.rows() {
        return Err(Error::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            logits.rows()
        )));
    }
    if weights.len() != k {
        return Err(Error::Shape(format!("{} class weights for {k} classes", weights.len())));
    }
    labels
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            if y >= k {
                return Err(Error::Contract(format!("label {y} out of range for {k} classes")));
            }
            let row = logits.row(i);
            let (max, lse) = row_logsumexp(row);
            Ok(weights[y] * (lse - (row[y] - max)))
        })
        .collect()
}

/// Per-sample Shannon entropy `−Σ_c p_c log p_c` from logits (0·log 0 = 0).
pub fn entropy_terms<T: Scalar>(logits: &Tensor<T>) -> Result<Vec<T>> {
    let logp = log_softmax(logits)?;
    Ok((0..logp.rows())
        .map(|i| {
            -logp
                .row(i)
                .iter()
                .map(|&lp| {
                    let p = lp.exp();
                    if p == T::zero() {
                        T::zero()
                    } else {
                        p * lp
                    }
                })
                .sum::<T>()
        })
        .collect())
}

pub(crate) fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::of_usize(v.len())
}
