//! Cross-validation harnesses (leave-one-out, random split, k-fold,
//! cluster-separated) and the ROC AUC / RMSE metrics.
//!
//! Folds and leave-one-out iterations run in parallel over a shared library;
//! results are gathered in row order, so output does not depend on the
//! thread count.

mod harness;
mod metrics;
mod plan;

pub use harness::{
    cluster_eval, evaluate, kfold_eval, loo_eval, score_predictions, single_scheme_eval,
    split_eval, EvalResult, FoldResult, Metric, MoleculePrediction,
};
pub use metrics::{rmse, roc_auc, BoxStats};
pub use plan::{
    assign_folds, min_cross_distance, single_linkage, Fold, PlanKind, SplitPlan,
    DEFAULT_CLUSTER_SCHEME, DEFAULT_K, DEFAULT_TEST_FRACTION,
};
