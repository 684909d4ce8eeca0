//! Batch analyses over stored learning curves and result tables.
//!
//! Curves are archived with their raw (timestamp, NAUC) points so any score
//! can be recomputed under different scoring parameters; stored ALC values
//! are never rescaled.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{alc, CurvePoint, LearningCurve, MetricsError, ScoringParams};
use crate::ranking::{self, aggregate_repeats, Leaderboard, RankingError, ResultTable};
use crate::report::{csv_line, num};

/// NAUC difference above which a budget pair is flagged.
pub const DEFAULT_NAUC_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StudyError {
    #[error("t0 grid must be non-empty with positive values")]
    InvalidGrid,
    #[error("archive is empty")]
    EmptyArchive,
    #[error("archived curves use different budgets ({0} and {1})")]
    MixedBudgets(f64, f64),
    #[error("archives differ on (method, task) keys: {0}")]
    KeyMismatch(String),
    #[error("ablation needs at least 2 variants, got {0}")]
    TooFewVariants(usize),
    #[error("unknown base method `{0}`")]
    UnknownBase(String),
    #[error("method `{0}` has no results")]
    MissingMethod(String),
    #[error("invalid variant: {0}")]
    InvalidVariant(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Ranking(#[from] RankingError),
}

/// Raw learning-curve points together with the budget they were recorded under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredCurve {
    pub budget: f64,
    pub points: Vec<CurvePoint>,
}

impl StoredCurve {
    pub fn curve(&self, t0: f64) -> Result<LearningCurve, MetricsError> {
        LearningCurve::new(self.points.clone(), ScoringParams::new(self.budget, t0)?)
    }

    pub fn final_score(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.score)
    }
}

/// Curves keyed by (method, task, repeat).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveArchive {
    curves: BTreeMap<(String, String, usize), StoredCurve>,
}

impl CurveArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, method: &str, task: &str, repeat: usize, curve: &LearningCurve) {
        self.curves.insert(
            (method.to_string(), task.to_string(), repeat),
            StoredCurve {
                budget: curve.params().budget(),
                points: curve.points().to_vec(),
            },
        );
    }

    /// Validates the points against `budget` before storing them.
    pub fn insert_points(
        &mut self,
        method: &str,
        task: &str,
        repeat: usize,
        budget: f64,
        points: Vec<CurvePoint>,
    ) -> Result<(), MetricsError> {
        let curve = LearningCurve::new(points, ScoringParams::new(budget, 1.0)?)?;
        self.insert(method, task, repeat, &curve);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String, usize), &StoredCurve)> {
        self.curves.iter()
    }

    pub fn methods(&self) -> Vec<String> {
        self.curves
            .keys()
            .map(|k| k.0.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn tasks(&self) -> Vec<String> {
        self.curves
            .keys()
            .map(|k| k.1.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    fn pairs(&self) -> BTreeSet<(String, String)> {
        self.curves
            .keys()
            .map(|k| (k.0.clone(), k.1.clone()))
            .collect()
    }

    /// The budget shared by every curve.
    pub fn budget(&self) -> Result<f64, StudyError> {
        let mut it = self.curves.values().map(|c| c.budget);
        let first = it.next().ok_or(StudyError::EmptyArchive)?;
        match it.find(|&b| b != first) {
            Some(other) => Err(StudyError::MixedBudgets(first, other)),
            None => Ok(first),
        }
    }

    /// Repeat-mean of `f` per (method, task).
    fn repeat_means<F>(&self, mut f: F) -> Result<BTreeMap<(String, String), f64>, StudyError>
    where
        F: FnMut(&StoredCurve) -> Result<f64, StudyError>,
    {
        let mut sums: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
        for ((m, t, _), c) in &self.curves {
            let v = f(c)?;
            let e = sums.entry((m.clone(), t.clone())).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
        Ok(sums
            .into_iter()
            .map(|(k, (s, n))| (k, s / n as f64))
            .collect())
    }
}

/// 20 log-spaced values from 1e-2 to 1e6 seconds.
pub fn default_t0_grid() -> Vec<f64> {
    (0..20)
        .map(|i| 10f64.powf(-2.0 + 8.0 * f64::from(i) / 19.0))
        .collect()
}

/// A pair of methods whose ALC order on a task reverses somewhere on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFlip {
    pub task: String,
    pub first: String,
    pub second: String,
    /// A grid value where `first` scores higher, and one where `second` does.
    pub first_ahead_at: f64,
    pub second_ahead_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T0Sweep {
    pub grid: Vec<f64>,
    pub methods: Vec<String>,
    pub tasks: Vec<String>,
    /// `alc[g][m][t]`: repeat-mean ALC at grid point `g`.
    pub alc: Vec<Vec<Vec<f64>>>,
    /// `average_ranks[g][m]`.
    pub average_ranks: Vec<Vec<f64>>,
    pub flips: Vec<OrderFlip>,
}

impl T0Sweep {
    /// `method,task,t0,alc` rows.
    pub fn alc_long_csv(&self) -> String {
        let mut out = csv_line(["method", "task", "t0", "alc"]);
        for (g, t0) in self.grid.iter().enumerate() {
            for (m, method) in self.methods.iter().enumerate() {
                for (t, task) in self.tasks.iter().enumerate() {
                    out.push_str(&csv_line([
                        method.as_str(),
                        task,
                        &num(*t0),
                        &num(self.alc[g][m][t]),
                    ]));
                }
            }
        }
        out
    }

    /// `method,t0,average_rank` rows.
    pub fn rank_long_csv(&self) -> String {
        let mut out = csv_line(["method", "t0", "average_rank"]);
        for (g, t0) in self.grid.iter().enumerate() {
            for (m, method) in self.methods.iter().enumerate() {
                out.push_str(&csv_line([
                    method.as_str(),
                    &num(*t0),
                    &num(self.average_ranks[g][m]),
                ]));
            }
        }
        out
    }

    pub fn flips_csv(&self) -> String {
        let mut out = csv_line([
            "task",
            "first",
            "second",
            "first_ahead_at",
            "second_ahead_at",
        ]);
        for f in &self.flips {
            out.push_str(&csv_line([
                f.task.as_str(),
                &f.first,
                &f.second,
                &num(f.first_ahead_at),
                &num(f.second_ahead_at),
            ]));
        }
        out
    }
}

const ORDER_TOLERANCE: f64 = 1e-12;

/// Rescores every archived curve at each `t0` in `grid` and ranks the
/// methods per grid point.
pub fn t0_sweep(archive: &CurveArchive, grid: &[f64]) -> Result<T0Sweep, StudyError> {
    if grid.is_empty() || grid.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
        return Err(StudyError::InvalidGrid);
    }
    archive.budget()?;
    let methods = archive.methods();
    let tasks = archive.tasks();

    let mut alc_grid = Vec::with_capacity(grid.len());
    let mut rank_grid = Vec::with_capacity(grid.len());
    for &t0 in grid {
        let means = archive.repeat_means(|c| Ok(alc(&c.curve(t0)?)))?;
        let mut table = ResultTable::new(methods.clone(), tasks.clone())?;
        for ((m, t), v) in &means {
            table.push(m, t, *v)?;
        }
        let stats = aggregate_repeats(&table)?;
        rank_grid.push(ranking::average_ranks(&table)?);
        alc_grid.push(stats.mean);
    }

    let mut flips = Vec::new();
    for (t, task) in tasks.iter().enumerate() {
        for a in 0..methods.len() {
            for b in a + 1..methods.len() {
                let ahead = |sign: f64| {
                    grid.iter()
                        .zip(&alc_grid)
                        .find(|(_, g)| sign * (g[a][t] - g[b][t]) > ORDER_TOLERANCE)
                        .map(|(t0, _)| *t0)
                };
                if let (Some(first_ahead_at), Some(second_ahead_at)) = (ahead(1.0), ahead(-1.0)) {
                    flips.push(OrderFlip {
                        task: task.clone(),
                        first: methods[a].clone(),
                        second: methods[b].clone(),
                        first_ahead_at,
                        second_ahead_at,
                    });
                }
            }
        }
    }

    Ok(T0Sweep {
        grid: grid.to_vec(),
        methods,
        tasks,
        alc: alc_grid,
        average_ranks: rank_grid,
        flips,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetPair {
    pub method: String,
    pub task: String,
    pub final_a: f64,
    pub final_b: f64,
    /// `final_b - final_a`
    pub diff: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetComparison {
    pub budget_a: f64,
    pub budget_b: f64,
    pub threshold: f64,
    pub pairs: Vec<BudgetPair>,
}

impl BudgetComparison {
    pub fn flagged(&self) -> impl Iterator<Item = &BudgetPair> {
        self.pairs.iter().filter(|p| p.flagged)
    }

    pub fn to_csv(&self) -> String {
        let mut out = csv_line([
            "method",
            "task",
            "final_nauc_a",
            "final_nauc_b",
            "diff",
            "flagged",
        ]);
        for p in &self.pairs {
            out.push_str(&csv_line([
                p.method.as_str(),
                &p.task,
                &num(p.final_a),
                &num(p.final_b),
                &num(p.diff),
                if p.flagged { "1" } else { "0" },
            ]));
        }
        out
    }

    /// `method,task,budget,final_nauc` rows.
    pub fn long_csv(&self) -> String {
        let mut out = csv_line(["method", "task", "budget", "final_nauc"]);
        for p in &self.pairs {
            out.push_str(&csv_line([
                p.method.as_str(),
                &p.task,
                &num(self.budget_a),
                &num(p.final_a),
            ]));
            out.push_str(&csv_line([
                p.method.as_str(),
                &p.task,
                &num(self.budget_b),
                &num(p.final_b),
            ]));
        }
        out
    }
}

/// Pairs the repeat-mean final NAUC of each (method, task) under two budgets
/// and flags pairs whose difference exceeds `threshold` in absolute value.
pub fn budget_comparison(
    archive_a: &CurveArchive,
    archive_b: &CurveArchive,
    threshold: f64,
) -> Result<BudgetComparison, StudyError> {
    let (pa, pb) = (archive_a.pairs(), archive_b.pairs());
    if pa != pb {
        let diff: Vec<String> = pa
            .symmetric_difference(&pb)
            .map(|(m, t)| format!("({m}, {t})"))
            .collect();
        return Err(StudyError::KeyMismatch(diff.join(", ")));
    }
    let budget_a = archive_a.budget()?;
    let budget_b = archive_b.budget()?;
    let fa = archive_a.repeat_means(|c| Ok(c.final_score()))?;
    let fb = archive_b.repeat_means(|c| Ok(c.final_score()))?;
    let pairs = fa
        .into_iter()
        .map(|((method, task), final_a)| {
            let final_b = fb[&(method.clone(), task.clone())];
            let diff = final_b - final_a;
            BudgetPair {
                method,
                task,
                final_a,
                final_b,
                diff,
                flagged: diff.abs() > threshold,
            }
        })
        .collect();
    Ok(BudgetComparison {
        budget_a,
        budget_b,
        threshold,
        pairs,
    })
}

/// Variants ordered by average rank with per-task mean and std.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub leaderboard: Leaderboard,
}

impl AblationTable {
    pub fn order(&self) -> Vec<&str> {
        self.leaderboard.order()
    }

    /// `variant,average_rank,<task>...` with `mean±std` cells.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["variant".to_string(), "average_rank".to_string()];
        header.extend(self.leaderboard.tasks.iter().cloned());
        let mut out = csv_line(&header);
        for e in &self.leaderboard.entries {
            let mut row = vec![e.team.clone(), num(e.average_rank)];
            row.extend(
                e.mean
                    .iter()
                    .zip(&e.std)
                    .map(|(m, s)| format!("{}±{}", num(*m), num(*s))),
            );
            out.push_str(&csv_line(&row));
        }
        out
    }
}

pub fn ablation_table(results: &ResultTable) -> Result<AblationTable, StudyError> {
    if results.teams().len() < 2 {
        return Err(StudyError::TooFewVariants(results.teams().len()));
    }
    Ok(AblationTable {
        leaderboard: ranking::average_rank(results)?,
    })
}

/// A method derived from `base` by disabling components and borrowing
/// components from other methods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantSpec {
    pub base: String,
    pub removed: BTreeSet<String>,
    /// (component tag, donor method), in display order.
    pub added: Vec<(String, String)>,
}

impl VariantSpec {
    pub fn new(base: &str, removed: &[&str], added: &[(&str, &str)]) -> Result<Self, StudyError> {
        let removed: BTreeSet<String> = removed.iter().map(|s| s.to_string()).collect();
        let mut tags = BTreeSet::new();
        for (tag, _) in added {
            if removed.contains(*tag) {
                return Err(StudyError::InvalidVariant(format!(
                    "`{tag}` both removed and added"
                )));
            }
            if !tags.insert(*tag) {
                return Err(StudyError::InvalidVariant(format!("`{tag}` added twice")));
            }
        }
        Ok(Self {
            base: base.to_string(),
            removed,
            added: added
                .iter()
                .map(|(t, d)| (t.to_string(), d.to_string()))
                .collect(),
        })
    }

    /// The change relative to the base, e.g. `+EN+HPO` or `-DA`.
    pub fn label(&self) -> String {
        let mut s: String = self.added.iter().map(|(t, _)| format!("+{t}")).collect();
        s.extend(self.removed.iter().map(|t| format!("-{t}")));
        s
    }

    /// Method id under which the variant's results are stored, e.g. `DW+EN`.
    pub fn method_id(&self) -> String {
        format!("{}{}", self.base, self.label())
    }

    /// Borrowing a component from the base itself reproduces a simpler
    /// composition, so such cells are left blank.
    pub fn is_self_donation(&self) -> bool {
        self.added.iter().any(|(_, donor)| *donor == self.base)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CombinationCell {
    /// Number of tasks where the variant's mean ALC is strictly higher.
    Count(usize),
    Blank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationMatrix {
    pub bases: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<CombinationCell>>,
    pub n_tasks: usize,
}

impl CombinationMatrix {
    pub fn blank_count(&self) -> usize {
        self.cells
            .iter()
            .flatten()
            .filter(|c| **c == CombinationCell::Blank)
            .count()
    }

    pub fn to_csv(&self) -> String {
        let mut header = vec!["base".to_string()];
        header.extend(self.columns.iter().cloned());
        let mut out = csv_line(&header);
        for (base, row) in self.bases.iter().zip(&self.cells) {
            let mut fields = vec![base.clone()];
            fields.extend(row.iter().map(|c| match c {
                CombinationCell::Count(n) => n.to_string(),
                CombinationCell::Blank => String::new(),
            }));
            out.push_str(&csv_line(&fields));
        }
        out
    }
}

/// Counts, per (base, variant), the tasks on which the variant beats its
/// base in repeat-mean ALC.
///
/// Columns are the distinct variant labels, fewest changes first, otherwise
/// in order of first appearance. Cells with no variant, or whose variant
/// borrows from its own base, are blank.
pub fn combination_matrix(
    results: &ResultTable,
    bases: &[String],
    variants: &BTreeMap<String, Vec<VariantSpec>>,
) -> Result<CombinationMatrix, StudyError> {
    for (key, list) in variants {
        if !bases.contains(key) {
            return Err(StudyError::UnknownBase(key.clone()));
        }
        if let Some(v) = list.iter().find(|v| v.base != *key) {
            return Err(StudyError::UnknownBase(v.base.clone()));
        }
    }
    let mut columns: Vec<(usize, String)> = Vec::new();
    for base in bases {
        for v in variants.get(base).into_iter().flatten() {
            let label = v.label();
            if !columns.iter().any(|(_, l)| *l == label) {
                columns.push((v.added.len() + v.removed.len(), label));
            }
        }
    }
    columns.sort_by_key(|(n, _)| *n);
    let columns: Vec<String> = columns.into_iter().map(|(_, l)| l).collect();

    let stats = aggregate_repeats(results)?;
    let row_of = |method: &str| {
        results
            .teams()
            .iter()
            .position(|t| t == method)
            .map(|i| &stats.mean[i])
            .ok_or_else(|| StudyError::MissingMethod(method.to_string()))
    };

    let mut cells = Vec::with_capacity(bases.len());
    for base in bases {
        let base_row = row_of(base).map_err(|_| StudyError::UnknownBase(base.clone()))?;
        let mut row = vec![CombinationCell::Blank; columns.len()];
        for v in variants.get(base).into_iter().flatten() {
            if v.is_self_donation() {
                continue;
            }
            let col = columns
                .iter()
                .position(|c| *c == v.label())
                .expect("label collected above");
            let variant_row = row_of(&v.method_id())?;
            let better = variant_row
                .iter()
                .zip(base_row)
                .filter(|(v, b)| v > b)
                .count();
            row[col] = CombinationCell::Count(better);
        }
        cells.push(row);
    }
    Ok(CombinationMatrix {
        bases: bases.to_vec(),
        columns,
        cells,
        n_tasks: results.tasks().len(),
    })
}
