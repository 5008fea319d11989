use super::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const BENIGN: usize = 0;
pub const MALIGNANT: usize = 1;

/// Total map from original class ids to `{0 = benign, 1 = malignant}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinarizationMap {
    targets: Vec<usize>,
}

impl BinarizationMap {
    /// `targets[c]` is the binary label of original class `c`.
    pub fn new(targets: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = targets.iter().find(|&&t| t > 1) {
            return Err(Error::Config(format!("binary targets must be 0 or 1, got {bad}")));
        }
        Ok(Self { targets })
    }

    /// Classes listed in `malignant` map to 1, the other `num_classes` ids to 0.
    pub fn from_malignant(num_classes: usize, malignant: &[usize]) -> Result<Self> {
        if let Some(&bad) = malignant.iter().find(|&&c| c >= num_classes) {
            return Err(Error::Config(format!("malignant class {bad} ≥ class count {num_classes}")));
        }
        Self::new(
            (0..num_classes)
                .map(|c| if malignant.contains(&c) { MALIGNANT } else { BENIGN })
                .collect(),
        )
    }

    /// Identity on `{0, 1}`.
    pub fn identity_binary() -> Self {
        Self { targets: vec![0, 1] }
    }

    /// DermaMNIST (7 classes, MedMNIST ordering): actinic keratoses (0),
    /// basal cell carcinoma (1) and melanoma (4) are malignant; benign
    /// keratosis (2), dermatofibroma (3), melanocytic nevi (5) and vascular
    /// lesions (6) are benign.
    pub fn dermamnist() -> Self {
        Self::from_malignant(7, &[0, 1, 4]).expect("preset is valid")
    }

    /// PathMNIST (9 classes, MedMNIST ordering): cancer-associated stroma (7)
    /// and colorectal adenocarcinoma epithelium (8) are malignant; adipose,
    /// background, debris, lymphocytes, mucus, smooth muscle and normal
    /// colon mucosa (0–6) are benign.
    pub fn pathmnist() -> Self {
        Self::from_malignant(9, &[7, 8]).expect("preset is valid")
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "dermamnist" => Some(Self::dermamnist()),
            "pathmnist" => Some(Self::pathmnist()),
            "identity" => Some(Self::identity_binary()),
            _ => None,
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn apply(&self, class: usize) -> Result<usize> {
        self.targets.get(class).copied().ok_or(Error::Mapping { class })
    }
}

/// Replaces every label by its binary group; features are untouched.
pub fn binarize<T: Scalar>(ds: &Dataset<T>, map: &BinarizationMap) -> Result<Dataset<T>> {
    if ds.num_classes() > map.targets.len() {
        return Err(Error::Mapping {
            class: map.targets.len(),
        });
    }
    let labels = ds.labels().iter().map(|&y| map.apply(y)).collect::<Result<Vec<_>>>()?;
    Dataset::new(ds.features().clone(), labels, 2)?
        .with_class_names(vec!["benign".into(), "malignant".into()])
}
