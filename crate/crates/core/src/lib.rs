//! Supervised neural gas (SNG) codebooks for class-conditional synthetic tabular data.
//!
//! The crate is split along the pipeline:
//!
//! - [`model`]: shared domain types (datasets, hyperparameters, trained models, synthetic batches).
//! - [`neural_gas`]: rank-based neural gas updates, per-class supervised training and the
//!   unsupervised topology-fitting variant.
//! - [`synthesis`]: prototype-plus-Gaussian-noise sampling and the fidelity MSE.
//! - [`evaluation`]: stratified splits, repeated-holdout experiments, metrics and classifiers.
//! - [`data_io`]: CSV ingestion/writing and deterministic fixture generators.

pub mod data_io;
pub mod error;
pub mod evaluation;
pub mod model;
pub mod neural_gas;
pub mod synthesis;

pub use error::{Result, SngError};
pub use model::{
    Codebook, Dataset, Finding, FindingKind, FeatureRange, Hyperparameters, Provenance, Sample,
    SngModel, SyntheticBatch,
};
