//! Generator-quality distances and novelty-detection scoring.

mod decision;
mod distance;
mod roc;

pub use decision::{
    classify_with_threshold, compute_gca_nda, evaluate_at, tau_grid, tune_threshold, Confusion, Decision,
    EvalReport, Prediction, Truth, TAU_STEPS,
};
pub use distance::{distance_report, pairwise_set_distance, self_set_distance, ClassDistances, DistanceReport, MeanStd};
pub use roc::{novelty_scores, roc_auc, RocPoint};
