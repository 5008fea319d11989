//! Multi-layer perceptron classifier over a flat parameter vector.
//!
//! Layout, per layer `l` in order: the `d_l×d_{l+1}` weight matrix row-major,
//! then the `d_{l+1}` bias. Saliency masks and gradients index this layout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{ops, GradRecord, Tensor, Var};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// `[d_in, h_1, …, h_L, K]`; hidden layers use ReLU.
    pub layer_sizes: Vec<usize>,
}

impl MlpConfig {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        let cfg = Self { layer_sizes };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `[d_in, hidden…, classes]`.
    pub fn with_hidden(d_in: usize, hidden: &[usize], classes: usize) -> Result<Self> {
        let mut sizes = vec![d_in];
        sizes.extend_from_slice(hidden);
        sizes.push(classes);
        Self::new(sizes)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::Config("an MLP needs at least input and output sizes".into()));
        }
        if self.layer_sizes.contains(&0) {
            return Err(Error::Config(format!("layer sizes must be ≥ 1: {:?}", self.layer_sizes)));
        }
        if self.num_classes() < 2 {
            return Err(Error::Config("output size must be ≥ 2 classes".into()));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_classes(&self) -> usize {
        *self.layer_sizes.last().expect("validated non-empty")
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn layout(&self) -> Vec<LayerSlot> {
        let mut offset = 0;
        self.layer_sizes
            .windows(2)
            .map(|w| {
                let slot = LayerSlot {
                    fan_in: w[0],
                    fan_out: w[1],
                    weight_offset: offset,
                    bias_offset: offset + w[0] * w[1],
                };
                offset = slot.bias_offset + w[1];
                slot
            })
            .collect()
    }
}

/// Where one affine layer lives in the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerSlot {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weight_offset: usize,
    pub bias_offset: usize,
}

impl LayerSlot {
    /// Flat index of `W[row][col]`.
    pub fn weight_index(&self, row: usize, col: usize) -> usize {
        self.weight_offset + row * self.fan_out + col
    }

    pub fn bias_index(&self, col: usize) -> usize {
        self.bias_offset + col
    }

    fn end(&self) -> usize {
        self.bias_offset + self.fan_out
    }
}

/// Structured view of one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

/// All model parameters as one stably-ordered flat array.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector<T> {
    config: MlpConfig,
    values: Vec<T>,
}

impl<T: Scalar> ParamVector<T> {
    pub fn from_values(config: MlpConfig, values: Vec<T>) -> Result<Self> {
        config.validate()?;
        if values.len() != config.param_count() {
            return Err(Error::Shape(format!(
                "config {:?} needs {} parameters, got {}",
                config.layer_sizes,
                config.param_count(),
                values.len()
            )));
        }
        Ok(Self { config, values })
    }

    pub fn zeros(config: MlpConfig) -> Result<Self> {
        let n = config.param_count();
        Self::from_values(config, vec![T::zero(); n])
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same layout, new values.
    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::from_values(self.config.clone(), values)
    }

    pub fn unflatten(&self) -> Vec<LayerParams<T>> {
        self.config
            .layout()
            .iter()
            .map(|s| LayerParams {
                weight: Tensor::matrix(
                    s.fan_in,
                    s.fan_out,
                    self.values[s.weight_offset..s.bias_offset].to_vec(),
                )
                .expect("layout sizes are positive"),
                bias: Tensor::vector(self.values[s.bias_offset..s.end()].to_vec()).expect("fan_out ≥ 1"),
            })
            .collect()
    }

    pub fn flatten(config: MlpConfig, layers: &[LayerParams<T>]) -> Result<Self> {
        config.validate()?;
        let layout = config.layout();
        if layout.len() != layers.len() {
            return Err(Error::Shape(format!(
                "{} layers supplied for a {}-layer config",
                layers.len(),
                layout.len()
            )));
        }
        let mut values = Vec::with_capacity(config.param_count());
        for (slot, layer) in layout.iter().zip(layers) {
            if layer.weight.shape() != [slot.fan_in, slot.fan_out] || layer.bias.len() != slot.fan_out {
                return Err(Error::Shape(format!(
                    "layer expects W {}×{} and b {}, got W{:?} b{:?}",
                    slot.fan_in,
                    slot.fan_out,
                    slot.fan_out,
                    layer.weight.shape(),
                    layer.bias.shape()
                )));
            }
            values.extend_from_slice(layer.weight.values());
            values.extend_from_slice(layer.bias.values());
        }
        Self::from_values(config, values)
    }

    pub fn cast<U: Scalar>(&self) -> ParamVector<U> {
        ParamVector {
            config: self.config.clone(),
            values: self.values.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }
}

/// Weights `~ U(−s, s)` with `s = sqrt(6/(fan_in+fan_out))`; biases zero.
pub fn init_params<T: Scalar>(config: &MlpConfig, seed: u64) -> Result<ParamVector<T>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![T::zero(); config.param_count()];
    for slot in config.layout() {
        let s = (6.0 / (slot.fan_in + slot.fan_out) as f64).sqrt();
        for v in &mut values[slot.weight_offset..slot.bias_offset] {
            *v = T::of(rng.random_range(-s..s));
        }
    }
    ParamVector::from_values(config.clone(), values)
}

fn check_input<T: Scalar>(params: &ParamVector<T>, x: &Tensor<T>) -> Result<()> {
    if !x.is_matrix() || x.cols() != params.config.input_dim() {
        return Err(Error::Shape(format!(
            "model expects n×{} input, got {:?}",
            params.config.input_dim(),
            x.shape()
        )));
    }
    Ok(())
}

/// `f_θ(x)`: affine/ReLU alternation, final layer affine only.
pub fn forward_logits<T: Scalar>(params: &ParamVector<T>, x: &Tensor<T>) -> Result<Tensor<T>> {
    check_input(params, x)?;
    let n = x.rows();
    let layout = params.config.layout();
    let last = layout.len() - 1;
    let mut h = x.values().to_vec();
    for (l, slot) in layout.iter().enumerate() {
        let w = &params.values[slot.weight_offset..slot.bias_offset];
        let b = &params.values[slot.bias_offset..slot.end()];
        h = ops::affine_kernel(&h, n, slot.fan_in, w, b, slot.fan_out);
        if l != last {
            for v in &mut h {
                if !(*v > T::zero()) {
                    *v = T::zero();
                }
            }
        }
    }
    Tensor::matrix(n, params.config.num_classes(), h)
}

/// `softmax(f_θ(x))`.
pub fn predict_proba<T: Scalar>(params: &ParamVector<T>, x: &Tensor<T>) -> Result<Tensor<T>> {
    ops::softmax(&forward_logits(params, x)?)
}

pub fn predict<T: Scalar>(params: &ParamVector<T>, x: &Tensor<T>) -> Result<Vec<usize>> {
    Ok(predict_proba(params, x)?.argmax_rows())
}

/// Parameter blocks of one model registered on a [`GradRecord`].
#[derive(Clone, Debug)]
pub struct RecordedModel {
    layers: Vec<(Var, Var)>,
}

impl RecordedModel {
    /// Registers every weight and bias of `params` on `rec`.
    pub fn register<T: Scalar>(rec: &mut GradRecord<T>, params: &ParamVector<T>) -> Result<Self> {
        let layers = params
            .unflatten()
            .into_iter()
            .zip(params.config.layout())
            .map(|(layer, slot)| {
                let w = rec.param(layer.weight, slot.weight_offset)?;
                let b = rec.param(layer.bias, slot.bias_offset)?;
                Ok((w, b))
            })
            .collect::<Result<_>>()?;
        Ok(Self { layers })
    }

    /// Recorded `f_θ(x)`; returns the logits node.
    pub fn logits<T: Scalar>(&self, rec: &mut GradRecord<T>, x: Tensor<T>) -> Result<Var> {
        let mut h = rec.input(x);
        let last = self.layers.len() - 1;
        for (l, &(w, b)) in self.layers.iter().enumerate() {
            h = rec.affine(h, w, b)?;
            if l != last {
                h = rec.relu(h);
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(s: &[usize]) -> MlpConfig {
        MlpConfig::new(s.to_vec()).unwrap()
    }

    #[test]
    fn param_count_matches_formula() {
        assert_eq!(cfg(&[4, 8, 2]).param_count(), 4 * 8 + 8 + 8 * 2 + 2);
        let p = init_params::<f64>(&cfg(&[4, 8, 2]), 1).unwrap();
        assert_eq!(p.len(), 58);
    }

    #[test]
    fn init_is_deterministic_with_zero_bias() {
        let c = cfg(&[3, 5, 2]);
        let a = init_params::<f64>(&c, 9).unwrap();
        let b = init_params::<f64>(&c, 9).unwrap();
        assert_eq!(a.values(), b.values());
        for slot in c.layout() {
            assert!(a.values()[slot.bias_offset..slot.bias_offset + slot.fan_out]
                .iter()
                .all(|&v| v == 0.0));
            let s = (6.0 / (slot.fan_in + slot.fan_out) as f64).sqrt();
            assert!(a.values()[slot.weight_offset..slot.bias_offset].iter().all(|v| v.abs() < s));
        }
        assert_ne!(a.values(), init_params::<f64>(&c, 10).unwrap().values());
    }

    #[test]
    fn invalid_configs() {
        assert!(MlpConfig::new(vec![3]).is_err());
        assert!(MlpConfig::new(vec![3, 0, 2]).is_err());
        assert!(MlpConfig::new(vec![3, 1]).is_err());
    }

    #[test]
    fn zero_params_give_uniform_probabilities() {
        let p = ParamVector::<f64>::zeros(cfg(&[3, 4, 2])).unwrap();
        let x = Tensor::matrix(2, 3, vec![1.0, -2.0, 3.0, 0.5, 0.5, 0.5]).unwrap();
        assert!(forward_logits(&p, &x).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(predict_proba(&p, &x).unwrap().values().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn wrong_input_width() {
        let p = ParamVector::<f64>::zeros(cfg(&[3, 2])).unwrap();
        let x = Tensor::matrix(1, 2, vec![1.0, 2.0]).unwrap();
        assert!(matches!(forward_logits(&p, &x), Err(Error::Shape(_))));
    }

    #[test]
    fn layout_indices() {
        let c = cfg(&[2, 3, 2]);
        let l = c.layout();
        assert_eq!(l[0].weight_index(1, 2), 5);
        assert_eq!(l[0].bias_index(0), 6);
        assert_eq!(l[1].weight_offset, 9);
        assert_eq!(l[1].bias_index(1), 16);
    }

    #[test]
    fn recorded_forward_matches_plain_forward() {
        let c = cfg(&[3, 4, 4, 2]);
        let p = init_params::<f64>(&c, 3).unwrap();
        let x = Tensor::matrix(2, 3, vec![0.3, -1.2, 2.0, 1.0, 0.1, -0.4]).unwrap();
        let mut rec = GradRecord::new(p.len());
        let m = RecordedModel::register(&mut rec, &p).unwrap();
        let z = m.logits(&mut rec, x.clone()).unwrap();
        assert_eq!(rec.value(z), &forward_logits(&p, &x).unwrap());
    }
}
