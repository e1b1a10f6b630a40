//! Online clustering with neuromorphic dendrites, evaluated on a synthetic
//! spike-sorting benchmark against a k-means baseline.

pub mod dendrite;
pub mod experiments;
pub mod kmeans;
pub mod metrics;
pub mod seeding;
pub mod synth;

pub use dendrite::{Cid, Dendrite, DendriteConfig, DendriteError, FeatureArray, FeatureVector, Search};
