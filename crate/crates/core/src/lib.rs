//! Evaluation toolkit for any-time learning benchmarks.
//!
//! Solvers are executables that publish predictions while they learn. This
//! crate runs them under a wall-time budget, turns their timestamped
//! predictions into learning curves, scores the curves by the area under the
//! learning curve on a logarithmic time axis, ranks teams by average rank, and
//! provides the batch analyses used to study a benchmark after the fact.
//!
//! Modules:
//!
//! - [`metrics`]: AUC, NAUC, the time transform, learning curves and ALC.
//! - [`taskio`]: task bundles and the prediction file format.
//! - [`orchestrator`]: running solvers (real or virtual clock) and scoring runs.
//! - [`ranking`]: repeat aggregation, average-rank leaderboards, rank correlation.
//! - [`studies`]: t0 sweeps, budget comparisons, ablation and combination tables.
//! - [`portfolio`]: greedy portfolio construction and meta-feature selection.

pub mod metrics;
pub mod orchestrator;
pub mod portfolio;
pub mod ranking;
mod report;
pub mod studies;
pub mod taskio;

pub use metrics::{
    alc, auc_binary, curve_from_events, nauc, time_transform, CurvePoint, LabelMatrix,
    LearningCurve, MetricsError, ScoreMatrix, ScoringParams,
};
