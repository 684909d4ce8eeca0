//! Leaderboards by average rank.
//!
//! Each team is ranked on every task by its repeat-mean ALC (1 = best, ties
//! share the mean of the ranks they span), and the leaderboard orders teams by
//! the mean of those per-task ranks. Equal average ranks are broken by the
//! higher overall mean ALC, then by team id.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{csv_line, num};

/// Average ranks closer than this are treated as equal.
pub const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankingError {
    #[error("no ALC value for team `{team}` on task `{task}`")]
    EmptyCell { team: String, task: String },
    #[error("unknown team `{0}`")]
    UnknownTeam(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("ALC value {value} for team `{team}` on task `{task}` is outside [-1, 1]")]
    InvalidScore {
        team: String,
        task: String,
        value: f64,
    },
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("rank vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("rank correlation needs at least 3 entries, got {0}")]
    TooShort(usize),
    #[error("rank vector has zero variance")]
    ZeroVariance,
    #[error("table has no teams or no tasks")]
    EmptyTable,
}

/// ALC scores indexed by team, task and repeat. Missing repeats are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    teams: Vec<String>,
    tasks: Vec<String>,
    scores: Vec<Vec<Vec<Option<f64>>>>,
}

fn check_unique(ids: &[String]) -> Result<(), RankingError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(RankingError::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

impl ResultTable {
    pub fn new(teams: Vec<String>, tasks: Vec<String>) -> Result<Self, RankingError> {
        check_unique(&teams)?;
        check_unique(&tasks)?;
        let scores = vec![vec![Vec::new(); tasks.len()]; teams.len()];
        Ok(Self {
            teams,
            tasks,
            scores,
        })
    }

    /// One repeat per cell, `means[team][task]`.
    pub fn from_means(
        teams: Vec<String>,
        tasks: Vec<String>,
        means: &[Vec<f64>],
    ) -> Result<Self, RankingError> {
        let mut table = Self::new(teams, tasks)?;
        for (i, row) in means.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                table.push_index(i, j, v)?;
            }
        }
        Ok(table)
    }

    pub fn teams(&self) -> &[String] {
        &self.teams
    }

    pub fn tasks(&self) -> &[String] {
        &self.tasks
    }

    fn team_index(&self, team: &str) -> Result<usize, RankingError> {
        self.teams
            .iter()
            .position(|t| t == team)
            .ok_or_else(|| RankingError::UnknownTeam(team.to_string()))
    }

    fn task_index(&self, task: &str) -> Result<usize, RankingError> {
        self.tasks
            .iter()
            .position(|t| t == task)
            .ok_or_else(|| RankingError::UnknownTask(task.to_string()))
    }

    fn push_index(&mut self, team: usize, task: usize, alc: f64) -> Result<(), RankingError> {
        if !(alc.is_finite() && (-1.0..=1.0).contains(&alc)) {
            return Err(RankingError::InvalidScore {
                team: self.teams[team].clone(),
                task: self.tasks[task].clone(),
                value: alc,
            });
        }
        self.scores[team][task].push(Some(alc));
        Ok(())
    }

    /// Appends one repeat to a cell.
    pub fn push(&mut self, team: &str, task: &str, alc: f64) -> Result<(), RankingError> {
        let (i, j) = (self.team_index(team)?, self.task_index(task)?);
        self.push_index(i, j, alc)
    }

    /// Stores a repeat at a fixed index, padding with absent entries.
    pub fn set(
        &mut self,
        team: &str,
        task: &str,
        repeat: usize,
        alc: f64,
    ) -> Result<(), RankingError> {
        let (i, j) = (self.team_index(team)?, self.task_index(task)?);
        self.push_index(i, j, alc)?;
        let cell = &mut self.scores[i][j];
        let value = cell.pop().flatten();
        if cell.len() <= repeat {
            cell.resize(repeat + 1, None);
        }
        cell[repeat] = value;
        Ok(())
    }

    /// Marks one repeat as absent. Returns whether a value was removed.
    pub fn exclude(&mut self, team: &str, task: &str, repeat: usize) -> Result<bool, RankingError> {
        let (i, j) = (self.team_index(team)?, self.task_index(task)?);
        Ok(self.scores[i][j]
            .get_mut(repeat)
            .map(|slot| slot.take().is_some())
            .unwrap_or(false))
    }

    /// Present repeats of one cell.
    pub fn repeats(&self, team: &str, task: &str) -> Result<Vec<f64>, RankingError> {
        let (i, j) = (self.team_index(team)?, self.task_index(task)?);
        Ok(self.scores[i][j].iter().flatten().copied().collect())
    }

    /// The same table restricted to `tasks`, in the given order.
    pub fn select_tasks(&self, tasks: &[String]) -> Result<Self, RankingError> {
        let idx = tasks
            .iter()
            .map(|t| self.task_index(t))
            .collect::<Result<Vec<_>, _>>()?;
        check_unique(tasks)?;
        Ok(Self {
            teams: self.teams.clone(),
            tasks: tasks.to_vec(),
            scores: self
                .scores
                .iter()
                .map(|row| idx.iter().map(|&j| row[j].clone()).collect())
                .collect(),
        })
    }
}

/// Per-cell repeat statistics, indexed `[team][task]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatStats {
    pub mean: Vec<Vec<f64>>,
    pub std: Vec<Vec<f64>>,
}

/// Sample mean and sample standard deviation (n - 1 denominator, 0 for a
/// single repeat) of every cell.
pub fn aggregate_repeats(table: &ResultTable) -> Result<RepeatStats, RankingError> {
    let mut mean = Vec::with_capacity(table.teams.len());
    let mut std = Vec::with_capacity(table.teams.len());
    for (i, row) in table.scores.iter().enumerate() {
        let mut mrow = Vec::with_capacity(row.len());
        let mut srow = Vec::with_capacity(row.len());
        for (j, cell) in row.iter().enumerate() {
            let values: Vec<f64> = cell.iter().flatten().copied().collect();
            if values.is_empty() {
                return Err(RankingError::EmptyCell {
                    team: table.teams[i].clone(),
                    task: table.tasks[j].clone(),
                });
            }
            let n = values.len() as f64;
            let m = values.iter().sum::<f64>() / n;
            let s = if values.len() > 1 {
                (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            mrow.push(m);
            srow.push(s);
        }
        mean.push(mrow);
        std.push(srow);
    }
    Ok(RepeatStats { mean, std })
}

/// Per-team ranks, 1 = best, ties averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankVector(pub Vec<f64>);

impl RankVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Ranks scores in descending order; equal scores share the average of the
/// ranks they occupy.
pub fn ranks_per_task(scores: &[f64]) -> RankVector {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1
        let shared = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    RankVector(ranks)
}

/// Mean over tasks of each team's per-task rank, in table order.
pub fn average_ranks(table: &ResultTable) -> Result<Vec<f64>, RankingError> {
    let stats = aggregate_repeats(table)?;
    Ok(average_ranks_of_means(&stats.mean, table.tasks.len()))
}

fn average_ranks_of_means(mean: &[Vec<f64>], n_tasks: usize) -> Vec<f64> {
    let mut totals = vec![0.0; mean.len()];
    for j in 0..n_tasks {
        let column: Vec<f64> = mean.iter().map(|row| row[j]).collect();
        for (total, r) in totals.iter_mut().zip(ranks_per_task(&column).0) {
            *total += r;
        }
    }
    totals.into_iter().map(|t| t / n_tasks as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub team: String,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub average_rank: f64,
    /// Mean ALC over all tasks, used as the first tie-break.
    pub overall_mean: f64,
    /// 1-based final position.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub tasks: Vec<String>,
    pub entries: Vec<LeaderboardEntry>,
}

impl Leaderboard {
    pub fn order(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.team.as_str()).collect()
    }

    pub fn entry(&self, team: &str) -> Option<&LeaderboardEntry> {
        self.entries.iter().find(|e| e.team == team)
    }

    /// `team,<task>_mean,<task>_std,...,average_rank,position`
    pub fn to_csv(&self) -> String {
        let mut header = vec!["team".to_string()];
        for t in &self.tasks {
            header.push(format!("{t}_mean"));
            header.push(format!("{t}_std"));
        }
        header.push("average_rank".into());
        header.push("position".into());
        let mut out = csv_line(&header);
        for e in &self.entries {
            let mut row = vec![e.team.clone()];
            for (m, s) in e.mean.iter().zip(&e.std) {
                row.push(num(*m));
                row.push(num(*s));
            }
            row.push(num(e.average_rank));
            row.push(e.position.to_string());
            out.push_str(&csv_line(&row));
        }
        out
    }
}

fn rank_cmp(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= RANK_TOLERANCE {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

pub fn average_rank(table: &ResultTable) -> Result<Leaderboard, RankingError> {
    if table.teams.is_empty() || table.tasks.is_empty() {
        return Err(RankingError::EmptyTable);
    }
    let stats = aggregate_repeats(table)?;
    let avg = average_ranks_of_means(&stats.mean, table.tasks.len());
    let mut entries: Vec<LeaderboardEntry> = table
        .teams
        .iter()
        .enumerate()
        .map(|(i, team)| LeaderboardEntry {
            team: team.clone(),
            overall_mean: stats.mean[i].iter().sum::<f64>() / table.tasks.len() as f64,
            mean: stats.mean[i].clone(),
            std: stats.std[i].clone(),
            average_rank: avg[i],
            position: 0,
        })
        .collect();
    entries.sort_by(|a, b| {
        rank_cmp(a.average_rank, b.average_rank)
            .then_with(|| b.overall_mean.total_cmp(&a.overall_mean))
            .then_with(|| a.team.cmp(&b.team))
    });
    for (i, e) in entries.iter_mut().enumerate() {
        e.position = i + 1;
    }
    Ok(Leaderboard {
        tasks: table.tasks.clone(),
        entries,
    })
}

/// Pairwise comparison matrix of average ranks: `cmp[i][j]` orders team `i`
/// against team `j`. Two orderings are the same ranking when their matrices
/// are equal.
pub type WeakOrder = Vec<Vec<Ordering>>;

fn weak_order(avg: &[f64]) -> WeakOrder {
    avg.iter()
        .map(|&a| avg.iter().map(|&b| rank_cmp(a, b)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    /// Average ranks on each non-empty part, in table team order.
    pub part_ranks: Vec<Vec<f64>>,
    pub whole_ranks: Vec<f64>,
    /// All non-empty parts induce the same ranking.
    pub premise_holds: bool,
    /// Whether the whole agrees with the parts; `None` when the premise fails.
    pub conclusion_holds: Option<bool>,
}

/// Checks the partition-consistency property of average ranking: if every
/// part of a task partition yields the same ranking, so does the whole.
pub fn check_consistency(
    table: &ResultTable,
    parts: &[Vec<String>],
) -> Result<ConsistencyReport, RankingError> {
    let mut covered = BTreeSet::new();
    for part in parts {
        for task in part {
            table
                .task_index(task)
                .map_err(|_| RankingError::BadPartition(format!("unknown task `{task}`")))?;
            if !covered.insert(task.clone()) {
                return Err(RankingError::BadPartition(format!(
                    "task `{task}` appears in two parts"
                )));
            }
        }
    }
    if covered.len() != table.tasks.len() {
        return Err(RankingError::BadPartition(format!(
            "partition covers {} of {} tasks",
            covered.len(),
            table.tasks.len()
        )));
    }

    let whole_ranks = average_ranks(table)?;
    let part_ranks = parts
        .iter()
        .filter(|p| !p.is_empty())
        .map(|p| average_ranks(&table.select_tasks(p)?))
        .collect::<Result<Vec<_>, _>>()?;
    let orders: Vec<WeakOrder> = part_ranks.iter().map(|r| weak_order(r)).collect();
    let premise_holds = orders.windows(2).all(|w| w[0] == w[1]);
    let conclusion_holds = premise_holds.then(|| {
        orders
            .first()
            .map_or(true, |o| *o == weak_order(&whole_ranks))
    });
    Ok(ConsistencyReport {
        part_ranks,
        whole_ranks,
        premise_holds,
        conclusion_holds,
    })
}

/// How the permutation p-value is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationTest {
    /// Exhaustive for n <= 8, otherwise 100 000 seeded random permutations.
    Auto {
        seed: u64,
    },
    Exhaustive,
    MonteCarlo {
        draws: u64,
        seed: u64,
    },
}

pub const EXHAUSTIVE_MAX_N: usize = 8;
pub const DEFAULT_DRAWS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 0;

impl Default for PermutationTest {
    fn default() -> Self {
        PermutationTest::Auto { seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankCorrelation {
    pub rho: f64,
    /// Two-sided permutation p-value.
    pub p_value: f64,
    pub permutations: u64,
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Visits every permutation of `v` (Heap's algorithm).
fn for_each_permutation(v: &mut [f64], mut visit: impl FnMut(&[f64])) {
    let n = v.len();
    let mut c = vec![0usize; n];
    visit(v);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                v.swap(0, i);
            } else {
                v.swap(c[i], i);
            }
            visit(v);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Pearson correlation of two rank vectors with a two-sided permutation
/// p-value: the share of permutations of `ry` whose |rho| reaches the
/// observed |rho|.
pub fn pearson_rank_correlation(
    rx: &RankVector,
    ry: &RankVector,
    test: PermutationTest,
) -> Result<RankCorrelation, RankingError> {
    if rx.len() != ry.len() {
        return Err(RankingError::LengthMismatch(rx.len(), ry.len()));
    }
    if rx.len() < 3 {
        return Err(RankingError::TooShort(rx.len()));
    }
    let rho = pearson(&rx.0, &ry.0).ok_or(RankingError::ZeroVariance)?;
    let threshold = rho.abs() - 1e-12;
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut y = ry.0.clone();
    let exhaustive = match test {
        PermutationTest::Exhaustive => true,
        PermutationTest::Auto { .. } => rx.len() <= EXHAUSTIVE_MAX_N,
        PermutationTest::MonteCarlo { .. } => false,
    };
    if exhaustive {
        for_each_permutation(&mut y, |perm| {
            total += 1;
            if pearson(&rx.0, perm).is_some_and(|r| r.abs() >= threshold) {
                hits += 1;
            }
        });
    } else {
        let (draws, seed) = match test {
            PermutationTest::MonteCarlo { draws, seed } => (draws, seed),
            PermutationTest::Auto { seed } => (DEFAULT_DRAWS, seed),
            PermutationTest::Exhaustive => unreachable!(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..draws {
            y.shuffle(&mut rng);
            total += 1;
            if pearson(&rx.0, &y).is_some_and(|r| r.abs() >= threshold) {
                hits += 1;
            }
        }
    }
    Ok(RankCorrelation {
        rho,
        p_value: hits as f64 / total.max(1) as f64,
        permutations: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn repeat_statistics() {
        let mut t = ResultTable::new(ids("team", 1), ids("task", 2)).unwrap();
        t.push("team0", "task0", 0.5).unwrap();
        t.push("team0", "task1", 0.4).unwrap();
        t.push("team0", "task1", 0.6).unwrap();
        let s = aggregate_repeats(&t).unwrap();
        assert_eq!((s.mean[0][0], s.std[0][0]), (0.5, 0.0));
        assert!((s.mean[0][1] - 0.5).abs() < 1e-15);
        // sqrt(((-0.1)^2 + 0.1^2) / 1) = sqrt(0.02)
        assert!((s.std[0][1] - 0.02f64.sqrt()).abs() < 1e-12);
        assert!((s.std[0][1] - 0.1414).abs() < 1e-4);
    }

    #[test]
    fn empty_cell_is_named() {
        let mut t = ResultTable::new(ids("team", 1), ids("task", 2)).unwrap();
        t.push("team0", "task0", 0.5).unwrap();
        assert_eq!(
            aggregate_repeats(&t),
            Err(RankingError::EmptyCell {
                team: "team0".into(),
                task: "task1".into()
            })
        );
    }

    #[test]
    fn exclusions_and_sparse_repeats() {
        let mut t = ResultTable::new(ids("a", 1), ids("t", 1)).unwrap();
        t.set("a0", "t0", 2, 0.3).unwrap();
        t.set("a0", "t0", 0, 0.1).unwrap();
        assert_eq!(t.repeats("a0", "t0").unwrap(), vec![0.1, 0.3]);
        assert!(t.exclude("a0", "t0", 2).unwrap());
        assert!(!t.exclude("a0", "t0", 1).unwrap());
        assert_eq!(t.repeats("a0", "t0").unwrap(), vec![0.1]);
        assert!(matches!(
            t.push("a0", "t0", 1.5),
            Err(RankingError::InvalidScore { .. })
        ));
        assert!(matches!(
            t.push("zz", "t0", 0.5),
            Err(RankingError::UnknownTeam(_))
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(ranks_per_task(&[0.9, 0.5, 0.1]).0, vec![1.0, 2.0, 3.0]);
        assert_eq!(ranks_per_task(&[0.5, 0.5]).0, vec![1.5, 1.5]);
        assert_eq!(
            ranks_per_task(&[0.2, 0.7, 0.2, 0.7]).0,
            vec![3.5, 1.5, 3.5, 1.5]
        );
    }

    fn sort_oracle(scores: &[f64]) -> Vec<f64> {
        // rank = 1 + #strictly better + (#equal others) / 2
        scores
            .iter()
            .map(|&s| {
                let better = scores.iter().filter(|&&o| o > s).count() as f64;
                let equal = scores.iter().filter(|&&o| o == s).count() as f64 - 1.0;
                1.0 + better + equal / 2.0
            })
            .collect()
    }

    #[test]
    fn ranks_match_oracle_on_random_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let v: Vec<f64> = (0..8)
                .map(|_| f64::from(rng.gen_range(0..5u8)) / 4.0)
                .collect();
            assert_eq!(ranks_per_task(&v).0, sort_oracle(&v));
        }
    }

    #[test]
    fn leaderboard_examples() {
        let three_way = ResultTable::from_means(
            ids("t", 3),
            ids("d", 2),
            &[vec![0.9, 0.2], vec![0.5, 0.5], vec![0.1, 0.8]],
        )
        .unwrap();
        let lb = average_rank(&three_way).unwrap();
        assert!(lb.entries.iter().all(|e| e.average_rank == 2.0));
        // tie broken by overall mean ALC: t0 0.55, t1 0.5, t2 0.45
        assert_eq!(lb.order(), vec!["t0", "t1", "t2"]);

        let single =
            ResultTable::from_means(ids("t", 3), ids("d", 1), &[vec![0.2], vec![0.9], vec![0.5]])
                .unwrap();
        assert_eq!(
            average_rank(&single).unwrap().order(),
            vec!["t1", "t2", "t0"]
        );

        let dominated = ResultTable::from_means(
            ids("t", 3),
            ids("d", 3),
            &[
                vec![0.1, 0.2, 0.3],
                vec![0.9, 0.8, 0.7],
                vec![0.5, 0.1, 0.6],
            ],
        )
        .unwrap();
        let lb = average_rank(&dominated).unwrap();
        assert_eq!(lb.entries[0].team, "t1");
        assert_eq!(lb.entries[0].average_rank, 1.0);
        assert_eq!(lb.entries[0].position, 1);
    }

    #[test]
    fn lexicographic_tie_break() {
        let t = ResultTable::from_means(
            vec!["b".into(), "a".into()],
            ids("d", 1),
            &[vec![0.5], vec![0.5]],
        )
        .unwrap();
        assert_eq!(average_rank(&t).unwrap().order(), vec!["a", "b"]);
    }

    #[test]
    fn leaderboard_csv() {
        let t = ResultTable::from_means(ids("t", 2), vec!["x".into()], &[vec![0.25], vec![0.75]])
            .unwrap();
        assert_eq!(
            average_rank(&t).unwrap().to_csv(),
            "team,x_mean,x_std,average_rank,position\nt1,0.75,0,1,1\nt0,0.25,0,2,2\n"
        );
    }

    #[test]
    fn consistency_cases() {
        let agree = ResultTable::from_means(
            ids("t", 3),
            ids("d", 4),
            &[
                vec![0.9, 0.8, 0.9, 0.7],
                vec![0.5, 0.6, 0.4, 0.5],
                vec![0.1, 0.2, 0.3, 0.1],
            ],
        )
        .unwrap();
        let parts = vec![ids("d", 2), vec!["d2".into(), "d3".into()]];
        let r = check_consistency(&agree, &parts).unwrap();
        assert!(r.premise_holds);
        assert_eq!(r.conclusion_holds, Some(true));

        let disagree =
            ResultTable::from_means(ids("t", 2), ids("d", 2), &[vec![0.9, 0.1], vec![0.1, 0.9]])
                .unwrap();
        let r = check_consistency(&disagree, &[vec!["d0".into()], vec!["d1".into()]]).unwrap();
        assert!(!r.premise_holds);
        assert_eq!(r.conclusion_holds, None);

        let r = check_consistency(&disagree, &[ids("d", 2), vec![]]).unwrap();
        assert_eq!(r.conclusion_holds, Some(true));

        assert!(matches!(
            check_consistency(&disagree, &[vec!["d0".into()]]),
            Err(RankingError::BadPartition(_))
        ));
        assert!(matches!(
            check_consistency(&disagree, &[ids("d", 2), vec!["d0".into()]]),
            Err(RankingError::BadPartition(_))
        ));
    }

    #[test]
    fn consistency_on_searched_tables() {
        // Brute-force search for random 3x4 tables whose halves agree on A>B>C.
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let mut found = 0;
        for _ in 0..20_000 {
            let means: Vec<Vec<f64>> = (0..3)
                .map(|_| {
                    (0..4)
                        .map(|_| f64::from(rng.gen_range(0..10u8)) / 10.0)
                        .collect()
                })
                .collect();
            let t = ResultTable::from_means(ids("t", 3), ids("d", 4), &means).unwrap();
            let parts = vec![ids("d", 2), vec!["d2".into(), "d3".into()]];
            let r = check_consistency(&t, &parts).unwrap();
            let strict_abc = r.part_ranks.iter().all(|p| p[0] < p[1] && p[1] < p[2]);
            if r.premise_holds && strict_abc {
                found += 1;
                assert_eq!(average_rank(&t).unwrap().order(), vec!["t0", "t1", "t2"]);
            }
        }
        assert!(found > 10);
    }

    #[test]
    fn correlation_extremes() {
        let x = RankVector(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let rev = RankVector(vec![5.0, 4.0, 3.0, 2.0, 1.0]);
        let same = pearson_rank_correlation(&x, &x, PermutationTest::default()).unwrap();
        assert_eq!(same.rho, 1.0);
        // only the identity and the reversal reach |rho| = 1
        assert_eq!(same.permutations, 120);
        assert!((same.p_value - 2.0 / 120.0).abs() < 1e-15);
        assert_eq!(
            pearson_rank_correlation(&x, &rev, PermutationTest::default())
                .unwrap()
                .rho,
            -1.0
        );
    }

    #[test]
    fn correlation_errors() {
        let x = RankVector(vec![1.0, 2.0, 3.0]);
        assert_eq!(
            pearson_rank_correlation(
                &x,
                &RankVector(vec![2.0, 2.0, 2.0]),
                PermutationTest::default()
            ),
            Err(RankingError::ZeroVariance)
        );
        assert_eq!(
            pearson_rank_correlation(&x, &RankVector(vec![1.0, 2.0]), PermutationTest::default()),
            Err(RankingError::LengthMismatch(3, 2))
        );
        assert_eq!(
            pearson_rank_correlation(
                &RankVector(vec![1.0, 2.0]),
                &RankVector(vec![2.0, 1.0]),
                PermutationTest::default()
            ),
            Err(RankingError::TooShort(2))
        );
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let x = RankVector((1..=10).map(f64::from).collect());
        let y = RankVector(vec![2.0, 1.0, 4.0, 3.0, 6.0, 5.0, 8.0, 7.0, 10.0, 9.0]);
        let a = pearson_rank_correlation(&x, &y, PermutationTest::Auto { seed: 3 }).unwrap();
        let b = pearson_rank_correlation(&x, &y, PermutationTest::Auto { seed: 3 }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.permutations, DEFAULT_DRAWS);
        assert!(a.p_value < 0.01);
    }

    proptest! {
        #[test]
        fn rank_sum_and_monotone_invariance(v in prop::collection::vec(0u8..6, 1..12)) {
            let scores: Vec<f64> = v.iter().map(|&x| f64::from(x) / 5.0 - 0.3).collect();
            let r = ranks_per_task(&scores);
            let n = scores.len() as f64;
            prop_assert_eq!(r.0.iter().sum::<f64>(), n * (n + 1.0) / 2.0);
            let transformed: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() + 7.0).collect();
            prop_assert_eq!(ranks_per_task(&transformed), r);
        }
    }
}
