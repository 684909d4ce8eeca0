//! Organizer workflows behind the `anytime-bench` binary.
//!
//! Every command reads its inputs from files, writes deterministic reports
//! (CSV plus JSON lines) into the output directory and returns a typed
//! summary. Wall-clock timestamps go to a separate `meta.json` so reruns on
//! identical inputs produce identical report payloads.
//!
//! Exit codes: 0 on success (including runs where the solver crashed but
//! scoring succeeded), 1 on harness errors, 2 on usage errors.

mod commands;
pub mod formats;

use std::path::{Path, PathBuf};

use anytime_bench::metrics::{ScoringParams, DEFAULT_BUDGET, DEFAULT_T0};
use anytime_bench::taskio::TaskMetadata;
use thiserror::Error;

pub use commands::{
    cmd_compare_budgets, cmd_correlate, cmd_leaderboard, cmd_portfolio, cmd_run, cmd_score,
    cmd_sweep_t0, exit_label, run_dir_name, PortfolioReport, RunOptions, RunReport, RunSummary,
    ScoreReport,
};

/// Environment variable used when `--out` is absent.
pub const ENV_OUT: &str = "ANYTIME_BENCH_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Harness(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Harness(_) => 1,
        }
    }

    pub(crate) fn harness(e: impl std::fmt::Display) -> Self {
        CliError::Harness(e.to_string())
    }
}

/// Global flags.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    /// Overrides the task's own budget; 1200 s when neither is set.
    pub budget: Option<f64>,
    pub t0: f64,
    pub repeats: usize,
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// Concurrent solver runs.
    pub jobs: usize,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            budget: None,
            t0: DEFAULT_T0,
            repeats: 1,
            out: None,
            seed: 0,
            jobs: 1,
        }
    }
}

impl CliConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if let Some(b) = self.budget.filter(|b| !positive(*b)) {
            return Err(CliError::Usage(format!("--budget must be > 0, got {b}")));
        }
        if !positive(self.t0) {
            return Err(CliError::Usage(format!(
                "--t0 must be > 0, got {}",
                self.t0
            )));
        }
        if self.repeats == 0 {
            return Err(CliError::Usage("--repeats must be >= 1".into()));
        }
        if self.jobs == 0 {
            return Err(CliError::Usage("--jobs must be >= 1".into()));
        }
        Ok(())
    }

    /// Explicit `--budget`, else the task's budget, else the default.
    pub fn params_for(&self, meta: &TaskMetadata) -> Result<ScoringParams, CliError> {
        let budget = self
            .budget
            .or(meta.budget_override)
            .unwrap_or(DEFAULT_BUDGET);
        ScoringParams::new(budget, self.t0).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn out_dir(&self) -> Result<&Path, CliError> {
        self.out.as_deref().ok_or_else(|| {
            CliError::Usage(format!("no output directory: pass --out or set {ENV_OUT}"))
        })
    }
}
