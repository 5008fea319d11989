//! Machine unlearning over a small MLP classifier, evaluated with utility,
//! forgetting and cost-sensitive clinical-risk metrics.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`, which every reference tolerance assumes.

pub mod autodiff;
pub mod data;
mod error;
pub mod metrics;
pub mod model;
mod scalar;
pub mod training;
pub mod unlearn;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Tensor = autodiff::Tensor<f64>;
pub type GradRecord = autodiff::GradRecord<f64>;
pub type ParamVector = model::ParamVector<f64>;
pub type Dataset = data::Dataset<f64>;
pub type LossSpec = training::LossSpec<f64>;

pub type Tensor32 = autodiff::Tensor<f32>;
pub type ParamVector32 = model::ParamVector<f32>;
pub type Dataset32 = data::Dataset<f32>;
