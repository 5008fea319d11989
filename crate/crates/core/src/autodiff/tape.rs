//! Recorded forward pass and its reverse sweep.

use super::ops;
use super::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Handle to a value recorded on a [`GradRecord`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op<T> {
    Input,
    Param { offset: usize },
    Affine { x: Var, w: Var, b: Var },
    Relu(Var),
    Softmax(Var),
    Log(Var),
    Mul(Var, Var),
    Add(Var, Var),
    Scale(Var, T),
    Sum(Var),
    Mean(Var),
    /// Mean of `w_y·(−log softmax(z)_y)`; `probs` cached for the fused gradient.
    SoftmaxCrossEntropy {
        logits: Var,
        labels: Vec<usize>,
        weights: Vec<T>,
        probs: Tensor<T>,
    },
    /// Mean row entropy of `softmax(z)`.
    SoftmaxEntropy {
        logits: Var,
        probs: Tensor<T>,
        log_probs: Tensor<T>,
        entropies: Vec<T>,
    },
}

#[derive(Debug)]
struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
}

/// Ordered record of primitive applications over a flat parameter space of
/// `param_count` entries. Parameters enter through [`GradRecord::param`] with
/// their offset into that space; [`GradRecord::backward`] returns gradients in
/// the same flat order.
#[derive(Debug)]
pub struct GradRecord<T> {
    nodes: Vec<Node<T>>,
    param_count: usize,
}

impl<T: Scalar> GradRecord<T> {
    pub fn new(param_count: usize) -> Self {
        Self {
            nodes: Vec::new(),
            param_count,
        }
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    /// Constant input; receives no gradient.
    pub fn input(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Input)
    }

    /// Parameter block occupying `offset..offset + value.len()` of the flat space.
    pub fn param(&mut self, value: Tensor<T>, offset: usize) -> Result<Var> {
        if offset + value.len() > self.param_count {
            return Err(Error::Contract(format!(
                "parameter block {}..{} exceeds parameter count {}",
                offset,
                offset + value.len(),
                self.param_count
            )));
        }
        Ok(self.push(value, Op::Param { offset }))
    }

    pub fn affine(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let out = ops::affine_forward(self.value(x), self.value(w), self.value(b))?;
        Ok(self.push(out, Op::Affine { x, w, b }))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let out = ops::relu(self.value(x));
        self.push(out, Op::Relu(x))
    }

    pub fn softmax(&mut self, x: Var) -> Result<Var> {
        let out = ops::softmax(self.value(x))?;
        Ok(self.push(out, Op::Softmax(x)))
    }

    /// Elementwise natural log; inputs must be positive.
    pub fn log(&mut self, x: Var) -> Var {
        let out = self.value(x).map(T::ln);
        self.push(out, Op::Log(x))
    }

    fn same_shape(&self, a: Var, b: Var, what: &str) -> Result<()> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::Shape(format!(
                "{what}: {:?} vs {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        Ok(())
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "mul")?;
        let vals = self
            .value(a)
            .values()
            .iter()
            .zip(self.value(b).values())
            .map(|(&x, &y)| x * y)
            .collect();
        let out = Tensor::new(self.value(a).shape().to_vec(), vals)?;
        Ok(self.push(out, Op::Mul(a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "add")?;
        let vals = self
            .value(a)
            .values()
            .iter()
            .zip(self.value(b).values())
            .map(|(&x, &y)| x + y)
            .collect();
        let out = Tensor::new(self.value(a).shape().to_vec(), vals)?;
        Ok(self.push(out, Op::Add(a, b)))
    }

    pub fn scale(&mut self, x: Var, c: T) -> Var {
        let out = self.value(x).map(|v| v * c);
        self.push(out, Op::Scale(x, c))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.value(x).values().iter().copied().sum();
        self.push(Tensor::scalar(s), Op::Sum(x))
    }

    pub fn mean(&mut self, x: Var) -> Var {
        let m = ops::mean(self.value(x).values());
        self.push(Tensor::scalar(m), Op::Mean(x))
    }

    /// Fused `(1/n)·Σ_i w_{y_i}·(−log softmax(z_i)_{y_i})`.
    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &[usize], weights: &[T]) -> Result<Var> {
        let terms = ops::cross_entropy_terms(self.value(logits), labels, weights)?;
        let probs = ops::softmax(self.value(logits))?;
        let loss = ops::mean(&terms);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::SoftmaxCrossEntropy {
                logits,
                labels: labels.to_vec(),
                weights: weights.to_vec(),
                probs,
            },
        ))
    }

    /// Fused mean entropy `(1/n)·Σ_i −Σ_c p_ic·log p_ic` of `softmax(z)`.
    pub fn softmax_entropy(&mut self, logits: Var) -> Result<Var> {
        let entropies = ops::entropy_terms(self.value(logits))?;
        let probs = ops::softmax(self.value(logits))?;
        let log_probs = ops::log_softmax(self.value(logits))?;
        let loss = ops::mean(&entropies);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::SoftmaxEntropy {
                logits,
                probs,
                log_probs,
                entropies,
            },
        ))
    }

    /// Reverse sweep from a scalar `loss`; returns `∂loss/∂θ` over the flat
    /// parameter space. Entries never touched by the forward pass are zero.
    pub fn backward(&self, loss: Var) -> Result<Vec<T>> {
        if loss.0 >= self.nodes.len() {
            return Err(Error::Contract("loss handle does not belong to this record".into()));
        }
        if self.value(loss).len() != 1 {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        let mut grads: Vec<Option<Vec<T>>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(vec![T::one()]);
        let mut out = vec![T::zero(); self.param_count];

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Input => {}
                Op::Param { offset } => {
                    for (o, gi) in out[*offset..*offset + g.len()].iter_mut().zip(&g) {
                        *o += *gi;
                    }
                }
                Op::Affine { x, w, b } => {
                    let xv = self.value(*x);
                    let wv = self.value(*w);
                    let (n, d, k) = (xv.rows(), xv.cols(), wv.cols());
                    let mut dx = vec![T::zero(); n * d];
                    let mut dw = vec![T::zero(); d * k];
                    let mut db = vec![T::zero(); k];
                    for i in 0..n {
                        for j in 0..k {
                            let gij = g[i * k + j];
                            if gij == T::zero() {
                                continue;
                            }
                            db[j] += gij;
                            for m in 0..d {
                                dx[i * d + m] += gij * wv.values()[m * k + j];
                                dw[m * k + j] += xv.values()[i * d + m] * gij;
                            }
                        }
                    }
                    accumulate(&mut grads, *x, dx);
                    accumulate(&mut grads, *w, dw);
                    accumulate(&mut grads, *b, db);
                }
                Op::Relu(x) => {
                    // Subgradient 0 at the kink.
                    let d = self
                        .value(*x)
                        .values()
                        .iter()
                        .zip(&g)
                        .map(|(&v, &gi)| if v > T::zero() { gi } else { T::zero() })
                        .collect();
                    accumulate(&mut grads, *x, d);
                }
                Op::Softmax(x) => {
                    let p = &node.value;
                    let k = p.cols();
                    let mut d = Vec::with_capacity(p.len());
                    for i in 0..p.rows() {
                        let pr = p.row(i);
                        let gr = &g[i * k..(i + 1) * k];
                        let dot: T = pr.iter().zip(gr).map(|(&a, &b)| a * b).sum();
                        d.extend(pr.iter().zip(gr).map(|(&pj, &gj)| pj * (gj - dot)));
                    }
                    accumulate(&mut grads, *x, d);
                }
                Op::Log(x) => {
                    let d = self.value(*x).values().iter().zip(&g).map(|(&v, &gi)| gi / v).collect();
                    accumulate(&mut grads, *x, d);
                }
                Op::Mul(a, b) => {
                    let av = self.value(*a).values();
                    let bv = self.value(*b).values();
                    let da = g.iter().zip(bv).map(|(&gi, &y)| gi * y).collect();
                    let db = g.iter().zip(av).map(|(&gi, &x)| gi * x).collect();
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, db);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g);
                }
                Op::Scale(x, c) => {
                    let d = g.iter().map(|&gi| gi * *c).collect();
                    accumulate(&mut grads, *x, d);
                }
                Op::Sum(x) => {
                    let n = self.value(*x).len();
                    accumulate(&mut grads, *x, vec![g[0]; n]);
                }
                Op::Mean(x) => {
                    let n = self.value(*x).len();
                    accumulate(&mut grads, *x, vec![g[0] / T::of_usize(n); n]);
                }
                Op::SoftmaxCrossEntropy {
                    logits,
                    labels,
                    weights,
                    probs,
                } => {
                    let (n, k) = (probs.rows(), probs.cols());
                    let scale = g[0] / T::of_usize(n);
                    let mut d = Vec::with_capacity(n * k);
                    for (i, &y) in labels.iter().enumerate() {
                        let c = scale * weights[y];
                        d.extend(probs.row(i).iter().enumerate().map(|(j, &p)| {
                            let onehot = if j == y { T::one() } else { T::zero() };
                            c * (p - onehot)
                        }));
                    }
                    accumulate(&mut grads, *logits, d);
                }
                Op::SoftmaxEntropy {
                    logits,
                    probs,
                    log_probs,
                    entropies,
                } => {
                    // dH/dz_j = −p_j·(log p_j + H)
                    let n = probs.rows();
                    let scale = g[0] / T::of_usize(n);
                    let mut d = Vec::with_capacity(probs.len());
                    for (i, &h) in entropies.iter().enumerate() {
                        d.extend(
                            probs
                                .row(i)
                                .iter()
                                .zip(log_probs.row(i))
                                .map(|(&p, &lp)| -scale * p * (lp + h)),
                        );
                    }
                    accumulate(&mut grads, *logits, d);
                }
            }
        }
        Ok(out)
    }
}

fn accumulate<T: Scalar>(grads: &mut [Option<Vec<T>>], v: Var, d: Vec<T>) {
    match &mut grads[v.0] {
        Some(existing) => {
            for (e, di) in existing.iter_mut().zip(d) {
                *e += di;
            }
        }
        slot @ None => *slot = Some(d),
    }
}
