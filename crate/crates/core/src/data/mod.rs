//! Labeled datasets, label binarization, forget/retain splitting and ingestion.

mod binarize;
mod io;
mod split;
mod synth;

pub use binarize::{binarize, BinarizationMap, BENIGN, MALIGNANT};
pub use io::{load_container, load_csv, read_container, read_csv, save_container, save_csv, write_container};
pub use split::{balanced_split, SplitResult, SplitSpec};
pub use synth::{synth_gaussians, SyntheticSpec};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `N×d` features with one integer label in `[0, K)` per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    features: Tensor<T>,
    labels: Vec<usize>,
    num_classes: usize,
    class_names: Option<Vec<String>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(features: Tensor<T>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if !features.is_matrix() {
            return Err(Error::Shape(format!("features must be N×d, got {:?}", features.shape())));
        }
        if labels.len() != features.rows() {
            return Err(Error::Shape(format!(
                "{} labels for {} samples",
                labels.len(),
                features.rows()
            )));
        }
        if num_classes == 0 {
            return Err(Error::Config("class count must be positive".into()));
        }
        if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= num_classes) {
            return Err(Error::Contract(format!(
                "label {y} at sample {i} is out of range for {num_classes} classes"
            )));
        }
        Ok(Self {
            features,
            labels,
            num_classes,
            class_names: None,
        })
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.num_classes {
            return Err(Error::Config(format!(
                "{} class names for {} classes",
                names.len(),
                self.num_classes
            )));
        }
        self.class_names = Some(names);
        Ok(self)
    }

    pub fn features(&self) -> &Tensor<T> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order. Errors on an empty selection.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Shape("empty subset".into()));
        }
        let features = self.features.select_rows(indices)?;
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Ok(Self {
            features,
            labels,
            num_classes: self.num_classes,
            class_names: self.class_names.clone(),
        })
    }

    /// Same features, replacement labels.
    pub fn relabeled(&self, labels: Vec<usize>) -> Result<Self> {
        let mut ds = Self::new(self.features.clone(), labels, self.num_classes)?;
        ds.class_names = self.class_names.clone();
        Ok(ds)
    }

    /// Row-wise concatenation; class counts must agree.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.num_classes != other.num_classes || self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "cannot concatenate K={} d={} with K={} d={}",
                self.num_classes,
                self.dim(),
                other.num_classes,
                other.dim()
            )));
        }
        let mut values = self.features.values().to_vec();
        values.extend_from_slice(other.features.values());
        let features = Tensor::matrix(self.len() + other.len(), self.dim(), values)?;
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        let mut ds = Self::new(features, labels, self.num_classes)?;
        ds.class_names = self.class_names.clone();
        Ok(ds)
    }

    pub fn cast<U: Scalar>(&self) -> Dataset<U> {
        Dataset {
            features: self.features.cast(),
            labels: self.labels.clone(),
            num_classes: self.num_classes,
            class_names: self.class_names.clone(),
        }
    }
}

/// Inverse-frequency weights `w_c = N / (K·N_c)`.
pub fn class_weights<T: Scalar>(ds: &Dataset<T>) -> Result<Vec<T>> {
    weights_from_counts(&ds.class_counts())
}

pub fn weights_from_counts<T: Scalar>(counts: &[usize]) -> Result<Vec<T>> {
    let n: usize = counts.iter().sum();
    let k = counts.len();
    counts
        .iter()
        .enumerate()
        .map(|(c, &nc)| {
            if nc == 0 {
                Err(Error::Weighting { class: c })
            } else {
                Ok(T::of(n as f64 / (k as f64 * nc as f64)))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(labels: Vec<usize>, k: usize) -> Dataset<f64> {
        let n = labels.len();
        Dataset::new(Tensor::matrix(n, 1, (0..n).map(|i| i as f64).collect()).unwrap(), labels, k).unwrap()
    }

    #[test]
    fn weights_formula() {
        let mut labels = vec![0; 80];
        labels.extend(vec![1; 20]);
        let w = class_weights(&ds(labels, 2)).unwrap();
        assert_eq!(w, vec![0.625, 2.5]);
        assert_eq!(w[0] * 80.0 + w[1] * 20.0, 100.0);
    }

    #[test]
    fn balanced_weights_are_one() {
        let w = class_weights(&ds(vec![0, 1, 2, 0, 1, 2], 3)).unwrap();
        assert_eq!(w, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn empty_class_is_an_error() {
        assert_eq!(
            class_weights(&ds(vec![0, 0, 2], 3)),
            Err(Error::Weighting { class: 1 })
        );
    }

    #[test]
    fn label_out_of_range() {
        let f = Tensor::matrix(1, 1, vec![0.0]).unwrap();
        assert!(Dataset::<f64>::new(f, vec![2], 2).is_err());
    }

    #[test]
    fn concat_and_subset() {
        let a = ds(vec![0, 1], 2);
        let b = ds(vec![1], 2);
        let c = a.concat(&b).unwrap();
        assert_eq!(c.labels(), &[0, 1, 1]);
        assert_eq!(c.subset(&[2, 0]).unwrap().features().values(), &[0.0, 0.0]);
        assert!(c.subset(&[]).is_err());
    }
}
