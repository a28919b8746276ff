//! Dataset ingestion, stratified splits, feature extraction,
//! standardization and target encoding.

mod dataset;
mod features;
mod split;
mod targets;
mod views;

pub use dataset::{load_dataset, write_feature_csv, Dataset, LoadOptions, Provenance, Samples};
pub use features::{extract_features, fit_standardizer, standardize, Standardizer};
pub use split::{split_dataset, Split, SplitAssignment, MIN_CLASS_SIZE};
pub use targets::{one_hot, sample_p_prime, stochastic_target, target_matrix, TargetKind, TargetVector};
pub use views::{hold_out_novel, prepare, FeatureSet, NovelHoldOut, PreparedData, GENERATED, REAL};
