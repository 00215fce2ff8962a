//! Reliability of individual Naive Bayes predictions.
//!
//! Categorical Naive Bayes with smoothing chosen by cross-validation, per-
//! instance uncertainty (single model and bootstrap ensemble) and
//! ε-contamination robustness, rank orders built from them, and
//! accuracy-rejection curves to compare those orders.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arc;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod nbc;
pub mod ranking;
pub mod rng;
pub mod robustness;
pub mod uncertainty;

pub use arc::{AccuracyRejectionCurve, ReliabilityRecord, RobustnessMetric, UncertaintyMetric};
pub use dataset::{
    DatasetManifest, DatasetSplit, DiscreteDataset, FeatureDomain, Instance, Transform,
};
pub use error::{Error, Result};
pub use experiment::{run_dataset, run_experiment, ExperimentConfig, ExperimentReport};
pub use nbc::{ModelEnsemble, NaiveBayesModel, PosteriorDistribution};
pub use ranking::{HybridWeight, RankOrder};
pub use robustness::RobustnessScores;
pub use uncertainty::UncertaintyScores;
