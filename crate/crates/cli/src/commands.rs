use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use anytime_bench::metrics::{self, LearningCurve, MetricsError, ScoreMatrix};
use anytime_bench::orchestrator::{
    self, unix_seconds, RunConfig, RunExit, RunRecord, SolverCommand,
};
use anytime_bench::portfolio::{self, Portfolio, Selection};
use anytime_bench::ranking::{self, Leaderboard, PermutationTest, RankCorrelation, RankVector};
use anytime_bench::studies::{self, BudgetComparison, CurveArchive, T0Sweep};
use anytime_bench::taskio::{self, TaskBundle};
use serde::Serialize;
use serde_json::json;

use crate::formats::{
    csv_string, jsonl, read_archive, read_events, read_features, read_matrix, read_results,
    render_archive, render_events, write_report, ARCHIVE_FILE, RESULTS_FILE,
};
use crate::{CliConfig, CliError};

fn load_task(root: &Path) -> Result<TaskBundle, CliError> {
    if !root.is_dir() {
        return Err(CliError::Usage(format!(
            "task directory {} does not exist",
            root.display()
        )));
    }
    taskio::load_task(root).map_err(CliError::harness)
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{}: no such file", path.display())))
    }
}

fn pretty_json(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("serializable report") + "\n"
}

/// Sample mean and standard deviation (n - 1; 0 for a single value).
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn exit_label(exit: &RunExit) -> String {
    match exit {
        RunExit::CleanFinish => "clean_finish".into(),
        RunExit::BudgetKill => "budget_kill".into(),
        RunExit::Crash(code) => format!("crash:{code}"),
        RunExit::ProtocolViolation(kind) => {
            let kind = serde_json::to_value(kind).expect("serializable");
            format!("protocol_violation:{}", kind.as_str().unwrap_or_default())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Method id used in reports; defaults to the solver program's file stem.
    pub method: Option<String>,
    pub poll_interval: f64,
    pub grace_period: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            method: None,
            poll_interval: RunConfig::DEFAULT_POLL_INTERVAL,
            grace_period: RunConfig::DEFAULT_GRACE_PERIOD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub method: String,
    pub task: String,
    pub repeat: usize,
    pub exit: String,
    pub events: usize,
    pub violations: usize,
    pub alc: f64,
    pub final_nauc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub method: String,
    pub task: String,
    pub budget: f64,
    pub t0: f64,
    pub runs: Vec<RunSummary>,
    pub alc_mean: f64,
    pub alc_std: f64,
    pub final_nauc_mean: f64,
    pub final_nauc_std: f64,
}

pub fn run_dir_name(repeat: usize) -> String {
    format!("run_{repeat}")
}

struct RunOutput {
    summary: RunSummary,
    curve: LearningCurve,
    timing: serde_json::Value,
}

/// Runs the solver `config.repeats` times (up to `config.jobs` at once) and
/// writes, per repeat, `run_<i>/{predictions/, scored/, events.txt,
/// record.json, curve.csv, score.json}`, then the aggregate reports.
pub fn cmd_run(
    task_root: &Path,
    argv: &[String],
    opts: &RunOptions,
    config: &CliConfig,
) -> Result<RunReport, CliError> {
    config.validate()?;
    if argv.is_empty() {
        return Err(CliError::Usage("missing solver command after `--`".into()));
    }
    let out = config.out_dir()?.to_path_buf();
    let task = load_task(task_root)?;
    let params = config.params_for(&task.metadata)?;
    let run_config = RunConfig::new(
        params.budget(),
        opts.poll_interval,
        opts.grace_period.min(params.budget()),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let method = opts.method.clone().unwrap_or_else(|| {
        Path::new(&argv[0])
            .file_stem()
            .map_or_else(|| argv[0].clone(), |s| s.to_string_lossy().into_owned())
    });
    let workdir = std::env::current_dir().map_err(CliError::harness)?;
    let solver = SolverCommand::new(argv.iter().cloned(), workdir);
    for i in 0..config.repeats {
        let dir = out.join(run_dir_name(i));
        if dir.exists() {
            return Err(CliError::Usage(format!(
                "{} already exists; refusing to overwrite",
                dir.display()
            )));
        }
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<RunOutput, CliError>>>> =
        Mutex::new((0..config.repeats).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..config.jobs.min(config.repeats) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= config.repeats {
                    break;
                }
                let result = one_run(
                    &task,
                    &solver,
                    &run_config,
                    params,
                    &method,
                    i,
                    &out.join(run_dir_name(i)),
                );
                slots.lock().expect("worker panicked")[i] = Some(result);
            });
        }
    });
    let outputs = slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every repeat ran"))
        .collect::<Result<Vec<_>, _>>()?;

    let mut archive = CurveArchive::new();
    for (i, o) in outputs.iter().enumerate() {
        archive.insert(&method, &task.metadata.name, i, &o.curve);
    }
    let runs: Vec<RunSummary> = outputs.iter().map(|o| o.summary.clone()).collect();
    let alcs: Vec<f64> = runs.iter().map(|r| r.alc).collect();
    let finals: Vec<f64> = runs.iter().map(|r| r.final_nauc).collect();
    let ((alc_mean, alc_std), (final_nauc_mean, final_nauc_std)) =
        (mean_std(&alcs), mean_std(&finals));
    let report = RunReport {
        method: method.clone(),
        task: task.metadata.name.clone(),
        budget: params.budget(),
        t0: params.t0(),
        runs,
        alc_mean,
        alc_std,
        final_nauc_mean,
        final_nauc_std,
    };

    let mut runs_csv = vec![[
        "method",
        "task",
        "repeat",
        "exit",
        "events",
        "violations",
        "alc",
        "final_nauc",
    ]
    .map(String::from)
    .to_vec()];
    let mut results_csv = vec![["team", "task", "repeat", "alc"].map(String::from).to_vec()];
    for r in &report.runs {
        runs_csv.push(vec![
            r.method.clone(),
            r.task.clone(),
            r.repeat.to_string(),
            r.exit.clone(),
            r.events.to_string(),
            r.violations.to_string(),
            r.alc.to_string(),
            r.final_nauc.to_string(),
        ]);
        results_csv.push(vec![
            r.method.clone(),
            r.task.clone(),
            r.repeat.to_string(),
            r.alc.to_string(),
        ]);
    }
    let aggregate = csv_string([
        [
            "method",
            "task",
            "runs",
            "alc_mean",
            "alc_std",
            "final_nauc_mean",
            "final_nauc_std",
        ]
        .map(String::from)
        .to_vec(),
        vec![
            method.clone(),
            report.task.clone(),
            report.runs.len().to_string(),
            alc_mean.to_string(),
            alc_std.to_string(),
            final_nauc_mean.to_string(),
            final_nauc_std.to_string(),
        ],
    ]);
    write_report(&out, "runs.csv", &csv_string(runs_csv))?;
    write_report(&out, "runs.jsonl", &jsonl(&report.runs))?;
    write_report(&out, "aggregate.csv", &aggregate)?;
    write_report(&out, RESULTS_FILE, &csv_string(results_csv))?;
    write_report(&out, ARCHIVE_FILE, &render_archive(&archive))?;
    let meta = json!({
        "argv": argv,
        "task_root": task_root,
        "runs": outputs.iter().map(|o| &o.timing).collect::<Vec<_>>(),
    });
    write_report(&out, "meta.json", &pretty_json(&meta))?;
    Ok(report)
}

fn one_run(
    task: &TaskBundle,
    solver: &SolverCommand,
    run_config: &RunConfig,
    params: metrics::ScoringParams,
    method: &str,
    repeat: usize,
    dir: &Path,
) -> Result<RunOutput, CliError> {
    let record: RunRecord =
        orchestrator::run_solver(task, solver, run_config, &dir.join("predictions"))
            .map_err(CliError::harness)?;
    let scored = orchestrator::score_run(&record, task, params).map_err(CliError::harness)?;

    // Scored predictions are re-rendered into `scored/` so the events file
    // stays valid even if the solver rewrote a file after it was read.
    let scored_dir = dir.join("scored");
    let mut event_files = Vec::with_capacity(record.events.len());
    let mut event_json = Vec::with_capacity(record.events.len());
    for e in &record.events {
        let name = e
            .document
            .source_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| taskio::prediction_file_name(e.document.sequence_index));
        write_report(
            &scored_dir,
            &name,
            &taskio::render_predictions(&e.document.matrix),
        )?;
        let rel = format!("scored/{name}");
        event_json.push(json!({
            "timestamp": e.timestamp,
            "file": rel,
            "sequence_index": e.document.sequence_index,
        }));
        event_files.push((e.timestamp, rel));
    }
    let violations: Vec<_> = record
        .violations
        .iter()
        .map(|v| {
            let mut v = v.clone();
            if let Ok(rel) = v.file.strip_prefix(dir) {
                v.file = rel.to_path_buf();
            }
            v
        })
        .collect();
    let record_json = json!({
        "budget": record.budget,
        "exit": record.exit,
        "events": event_json,
        "violations": violations,
    });
    write_report(dir, "record.json", &pretty_json(&record_json))?;
    write_report(
        dir,
        "events.txt",
        &render_events(event_files.iter().map(|(t, p)| (*t, p.as_str()))),
    )?;
    write_report(dir, "curve.csv", &curve_csv(&scored.curve))?;
    let score_json = json!({
        "budget": params.budget(),
        "t0": params.t0(),
        "alc": scored.alc,
        "final_nauc": scored.final_nauc,
    });
    write_report(dir, "score.json", &pretty_json(&score_json))?;

    Ok(RunOutput {
        summary: RunSummary {
            method: method.to_string(),
            task: task.metadata.name.clone(),
            repeat,
            exit: exit_label(&record.exit),
            events: record.events.len(),
            violations: record.violations.len(),
            alc: scored.alc,
            final_nauc: scored.final_nauc,
        },
        curve: scored.curve,
        timing: json!({
            "repeat": repeat,
            "started_at": unix_seconds(record.started_at),
            "ended_at": unix_seconds(record.ended_at),
            "duration": record.duration(),
        }),
    })
}

fn curve_csv(curve: &LearningCurve) -> String {
    let mut rows = vec![vec!["timestamp".to_string(), "score".to_string()]];
    rows.extend(
        curve
            .points()
            .iter()
            .map(|p| vec![p.timestamp.to_string(), p.score.to_string()]),
    );
    csv_string(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub curve: LearningCurve,
    pub alc: f64,
    pub final_nauc: f64,
}

impl ScoreReport {
    pub fn curve_csv(&self) -> String {
        curve_csv(&self.curve)
    }

    /// Curve points, then one summary record.
    pub fn jsonl(&self) -> String {
        let params = self.curve.params();
        let mut out = jsonl(self.curve.points());
        out.push_str(&jsonl([json!({
            "budget": params.budget(),
            "t0": params.t0(),
            "alc": self.alc,
            "final_nauc": self.final_nauc,
        })]));
        out
    }

    pub fn text(&self) -> String {
        let mut out = String::from("timestamp score\n");
        for p in self.curve.points() {
            out.push_str(&format!("{} {}\n", p.timestamp, p.score));
        }
        out.push_str(&format!(
            "alc {}\nfinal_nauc {}\n",
            self.alc, self.final_nauc
        ));
        out
    }
}

/// Rescores an events file against a task's solution. Writes `curve.csv` and
/// `score.jsonl` when an output directory is configured.
pub fn cmd_score(
    events_file: &Path,
    task_root: &Path,
    config: &CliConfig,
) -> Result<ScoreReport, CliError> {
    config.validate()?;
    require_file(events_file)?;
    let task = load_task(task_root)?;
    let params = config.params_for(&task.metadata)?;
    let lines = read_events(events_file)?;
    let row_err = |line: usize, e: &dyn std::fmt::Display| {
        CliError::Harness(format!("{}: row {line}: {e}", events_file.display()))
    };
    let mut matrices: Vec<(f64, ScoreMatrix)> = Vec::with_capacity(lines.len());
    for ev in &lines {
        let doc = taskio::parse_predictions(&ev.path, &task.metadata)
            .map_err(|e| row_err(ev.line, &e))?;
        matrices.push((ev.timestamp, doc.matrix));
    }
    let events: Vec<(f64, &ScoreMatrix)> = matrices.iter().map(|(t, m)| (*t, m)).collect();
    let curve =
        metrics::curve_from_events(&events, &task.solution, params).map_err(|e| match e {
            MetricsError::Event { index, source } => row_err(lines[index].line, &source),
            other => CliError::harness(other),
        })?;
    let report = ScoreReport {
        alc: metrics::alc(&curve),
        final_nauc: curve.final_score(),
        curve,
    };
    if let Some(out) = &config.out {
        write_report(out, "curve.csv", &report.curve_csv())?;
        write_report(out, "score.jsonl", &report.jsonl())?;
    }
    Ok(report)
}

fn out_or<'a>(config: &'a CliConfig, fallback: &'a Path) -> &'a Path {
    config.out.as_deref().unwrap_or(fallback)
}

/// Average-rank leaderboard from `results.csv`; writes `leaderboard.csv` and
/// `leaderboard.jsonl` (into the results directory without `--out`).
pub fn cmd_leaderboard(results_dir: &Path, config: &CliConfig) -> Result<Leaderboard, CliError> {
    config.validate()?;
    let table = read_results(results_dir)?;
    let board = ranking::average_rank(&table).map_err(CliError::harness)?;
    let out = out_or(config, results_dir);
    write_report(out, "leaderboard.csv", &board.to_csv())?;
    write_report(out, "leaderboard.jsonl", &jsonl(&board.entries))?;
    Ok(board)
}

/// Accepts an archive file or a directory holding `archive.csv`.
fn archive_path(path: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    let file = if path.is_dir() {
        path.join(ARCHIVE_FILE)
    } else {
        path.to_path_buf()
    };
    require_file(&file)?;
    let dir = file
        .parent()
        .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    Ok((file, dir))
}

/// Rescores archived curves over a t0 grid (default: 20 log-spaced values
/// from 1e-2 to 1e6); writes `sweep_alc.csv`, `sweep_ranks.csv`,
/// `sweep_flips.csv`.
pub fn cmd_sweep_t0(
    archive: &Path,
    grid: Option<&[f64]>,
    config: &CliConfig,
) -> Result<T0Sweep, CliError> {
    config.validate()?;
    let grid = grid.map_or_else(studies::default_t0_grid, <[f64]>::to_vec);
    if grid.is_empty() || grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(CliError::Usage("--grid needs positive t0 values".into()));
    }
    let (file, dir) = archive_path(archive)?;
    let sweep = studies::t0_sweep(&read_archive(&file)?, &grid).map_err(CliError::harness)?;
    let out = out_or(config, &dir);
    write_report(out, "sweep_alc.csv", &sweep.alc_long_csv())?;
    write_report(out, "sweep_ranks.csv", &sweep.rank_long_csv())?;
    write_report(out, "sweep_flips.csv", &sweep.flips_csv())?;
    Ok(sweep)
}

/// Compares final NAUC between two archives recorded under different
/// budgets; writes `budget_comparison.csv` and `budget_long.csv`.
pub fn cmd_compare_budgets(
    archive_a: &Path,
    archive_b: &Path,
    threshold: f64,
    config: &CliConfig,
) -> Result<BudgetComparison, CliError> {
    config.validate()?;
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(CliError::Usage(format!(
            "--threshold must be >= 0, got {threshold}"
        )));
    }
    let (fa, dir) = archive_path(archive_a)?;
    let (fb, _) = archive_path(archive_b)?;
    let cmp = studies::budget_comparison(&read_archive(&fa)?, &read_archive(&fb)?, threshold)
        .map_err(CliError::harness)?;
    let out = out_or(config, &dir);
    write_report(out, "budget_comparison.csv", &cmp.to_csv())?;
    write_report(out, "budget_long.csv", &cmp.long_csv())?;
    Ok(cmp)
}

/// Pearson correlation between the average ranks of two result sets over the
/// same teams, with a permutation p-value seeded by `--seed`; writes
/// `correlation.csv`.
pub fn cmd_correlate(
    results_a: &Path,
    results_b: &Path,
    config: &CliConfig,
) -> Result<RankCorrelation, CliError> {
    config.validate()?;
    let board_a = ranking::average_rank(&read_results(results_a)?).map_err(CliError::harness)?;
    let board_b = ranking::average_rank(&read_results(results_b)?).map_err(CliError::harness)?;
    let mut teams: Vec<&str> = board_a.order();
    teams.sort_unstable();
    let mut teams_b = board_b.order();
    teams_b.sort_unstable();
    if teams != teams_b {
        return Err(CliError::Harness(
            "the two result sets rank different teams".into(),
        ));
    }
    let ranks = |board: &Leaderboard| {
        RankVector(
            teams
                .iter()
                .map(|t| board.entry(t).expect("same teams").average_rank)
                .collect(),
        )
    };
    let (ra, rb) = (ranks(&board_a), ranks(&board_b));
    let corr =
        ranking::pearson_rank_correlation(&ra, &rb, PermutationTest::Auto { seed: config.seed })
            .map_err(CliError::harness)?;
    let mut rows = vec![vec!["team".to_string(), "rank_a".into(), "rank_b".into()]];
    rows.extend(
        teams
            .iter()
            .zip(ra.as_slice().iter().zip(rb.as_slice()))
            .map(|(t, (a, b))| vec![t.to_string(), a.to_string(), b.to_string()]),
    );
    let summary = csv_string([
        ["rho", "p_value", "permutations", "seed"]
            .map(String::from)
            .to_vec(),
        vec![
            corr.rho.to_string(),
            corr.p_value.to_string(),
            corr.permutations.to_string(),
            config.seed.to_string(),
        ],
    ]);
    let out = out_or(config, results_a);
    write_report(out, "correlation.csv", &summary)?;
    write_report(out, "correlation_ranks.csv", &csv_string(rows))?;
    Ok(corr)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioReport {
    pub portfolio: Portfolio,
    pub generalist: String,
    /// Chosen configuration per dataset of the features file. Datasets that
    /// are matrix columns are held out of their own neighbor search.
    pub selections: BTreeMap<String, Selection>,
}

/// Greedy portfolio of size `k`, the generalist configuration, and per-dataset
/// selections when a features file is given. Writes `portfolio.csv`,
/// `selections.csv` and `portfolio.jsonl` (next to the matrix without `--out`).
pub fn cmd_portfolio(
    matrix_csv: &Path,
    features_csv: Option<&Path>,
    k: usize,
    config: &CliConfig,
) -> Result<PortfolioReport, CliError> {
    config.validate()?;
    require_file(matrix_csv)?;
    if let Some(f) = features_csv {
        require_file(f)?;
    }
    let matrix = read_matrix(matrix_csv)?;
    if k == 0 || k > matrix.configs().len() {
        return Err(CliError::Usage(format!(
            "--k must be in 1..={}, got {k}",
            matrix.configs().len()
        )));
    }
    let chosen = portfolio::greedy_portfolio(&matrix, k).map_err(CliError::harness)?;
    let generalist = portfolio::generalist_config(&matrix);

    let mut selections = BTreeMap::new();
    if let Some(path) = features_csv {
        let features = read_features(path)?;
        for (dataset, query) in &features {
            let train: BTreeMap<String, _> = features
                .iter()
                .filter(|(d, _)| *d != dataset && matrix.dataset_index(d).is_some())
                .map(|(d, f)| (d.clone(), *f))
                .collect();
            if train.is_empty() {
                return Err(CliError::Harness(format!(
                    "{}: no other matrix dataset has features to compare `{dataset}` with",
                    path.display()
                )));
            }
            let sel = portfolio::select_config(&chosen.configs, &matrix, &train, query)
                .map_err(CliError::harness)?;
            selections.insert(dataset.clone(), sel);
        }
    }

    let mut portfolio_rows = vec![["pick", "config", "coverage"].map(String::from).to_vec()];
    for (i, (c, cov)) in chosen.configs.iter().zip(&chosen.coverage).enumerate() {
        portfolio_rows.push(vec![(i + 1).to_string(), c.clone(), cov.to_string()]);
    }
    let mut selection_rows = vec![["dataset", "config", "nearest_dataset", "distance"]
        .map(String::from)
        .to_vec()];
    for (d, s) in &selections {
        selection_rows.push(vec![
            d.clone(),
            s.config.clone(),
            s.nearest_dataset.clone(),
            s.distance.to_string(),
        ]);
    }
    let report = PortfolioReport {
        portfolio: chosen,
        generalist,
        selections,
    };
    let dir = matrix_csv.parent().unwrap_or(Path::new("."));
    let out = out_or(config, dir);
    write_report(out, "portfolio.csv", &csv_string(portfolio_rows))?;
    write_report(out, "selections.csv", &csv_string(selection_rows))?;
    write_report(
        out,
        "portfolio.jsonl",
        &jsonl([serde_json::to_value(&report).expect("serializable")]),
    )?;
    Ok(report)
}
