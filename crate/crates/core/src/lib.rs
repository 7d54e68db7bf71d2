//! Training and auditing of classifiers and score functions under
//! between-group and within-group fairness constraints.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); count-based
//! metrics are computed exactly with integer ratios.

pub mod data;
pub mod error;
pub mod metrics;
pub mod models;
pub mod penalties;
pub mod repair;
pub mod scalar;
pub mod training;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Dataset64 = data::Dataset<f64>;
pub type Dataset32 = data::Dataset<f32>;
pub type Model64 = models::Model<f64>;
pub type Model32 = models::Model<f32>;
pub type FairnessReport64 = metrics::FairnessReport<f64>;
pub type ReferenceModel64 = penalties::ReferenceModel<f64>;
pub type RunResult64 = training::RunResult<f64>;
pub type GroupQuantileMap64 = repair::GroupQuantileMap<f64>;
pub type MassagingPlan64 = repair::MassagingPlan<f64>;
