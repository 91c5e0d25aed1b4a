//! Scoring, significance testing and cross-validated experiments.

mod cv;
mod metrics;
mod wilcoxon;

pub use cv::{
    aggregate, cross_validate, run_split, score, CellReport, ClassifierKind, EvalReport,
    InstanceOutcome, Metrics, SafetySplit,
};
pub use metrics::{
    brier, credal_metrics, discounted, discounted_accuracy, mean_utility, utility, CredalMetrics,
    Utility,
};
pub use wilcoxon::{midranks, wilcoxon_signed_rank, Wilcoxon, EXACT_LIMIT};
