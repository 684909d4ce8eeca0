//! Runs a solver executable against a task under a wall-time budget.
//!
//! The orchestrator plays both sides of the ingestion/scoring pair: it
//! launches the solver as a separate process, watches the shared prediction
//! directory, timestamps every complete prediction file the moment it becomes
//! visible, and writes the ending signal (`end.txt`) once the budget is spent
//! or the solver finishes. A deterministic virtual-clock variant lives in
//! [`simulate`].

mod simulate;

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::io;
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use nix::sys::signal::{killpg, Signal};
use nix::unistd::Pid;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{self, LearningCurve, MetricsError, ScoringParams};
use crate::taskio::{self, PredictionDocument, TaskBundle, TaskError};

pub use simulate::{
    play_schedule, simulate_run, ClockMode, ScheduleError, ScriptedSolver, SCHEDULE_FILE,
};

/// Ending signal written into the shared directory by the orchestrator.
pub const END_SIGNAL_FILE: &str = "end.txt";

pub const ENV_TASK_DIR: &str = "TASK_DIR";
pub const ENV_PREDICTION_DIR: &str = "PREDICTION_DIR";
pub const ENV_TIME_BUDGET: &str = "TIME_BUDGET_SECONDS";
pub const ENV_N_TEST: &str = "N_TEST";
pub const ENV_N_CLASSES: &str = "N_CLASSES";

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("failed to launch `{program}`: {source}")]
    LaunchFailure {
        program: String,
        #[source]
        source: io::Error,
    },
    #[error("shared prediction directory {} is not empty", .0.display())]
    DirectoryNotEmpty(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OrchestratorError + '_ {
    move |source| OrchestratorError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverCommand {
    pub argv: Vec<String>,
    pub env: BTreeMap<String, String>,
    pub workdir: PathBuf,
}

impl SolverCommand {
    pub fn new<I, S>(argv: I, workdir: impl Into<PathBuf>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            argv: argv.into_iter().map(Into::into).collect(),
            env: BTreeMap::new(),
            workdir: workdir.into(),
        }
    }
}

/// Timing knobs, all in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub budget: f64,
    pub poll_interval: f64,
    pub grace_period: f64,
}

impl RunConfig {
    pub const DEFAULT_POLL_INTERVAL: f64 = 0.05;
    pub const DEFAULT_GRACE_PERIOD: f64 = 5.0;

    pub fn new(
        budget: f64,
        poll_interval: f64,
        grace_period: f64,
    ) -> Result<Self, OrchestratorError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(budget) && positive(poll_interval) && positive(grace_period)) {
            return Err(OrchestratorError::InvalidConfig(format!(
                "budget={budget}, poll_interval={poll_interval}, grace_period={grace_period} must all be > 0"
            )));
        }
        if grace_period > budget {
            return Err(OrchestratorError::InvalidConfig(format!(
                "grace_period {grace_period} exceeds budget {budget}"
            )));
        }
        Ok(Self {
            budget,
            poll_interval,
            grace_period,
        })
    }

    /// Budget taken from the scoring parameters, default poll interval, and
    /// the default grace period clamped to the budget.
    pub fn from_params(params: &ScoringParams) -> Self {
        Self {
            budget: params.budget(),
            poll_interval: Self::DEFAULT_POLL_INTERVAL,
            grace_period: Self::DEFAULT_GRACE_PERIOD.min(params.budget()),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_params(&ScoringParams::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionEvent {
    /// Seconds since run start at which the file was first seen complete.
    pub timestamp: f64,
    pub document: PredictionDocument,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A prediction file that failed to parse.
    MalformedPrediction,
    /// A visible file that does not follow the naming convention.
    UnexpectedFile,
    /// The solver wrote the ending signal itself.
    ForgedEndSignal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub timestamp: f64,
    pub kind: ViolationKind,
    pub file: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "detail")]
pub enum RunExit {
    CleanFinish,
    BudgetKill,
    /// Non-zero exit code; death by signal `s` is reported as `128 + s`.
    Crash(i32),
    ProtocolViolation(ViolationKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub events: Vec<PredictionEvent>,
    pub exit: RunExit,
    pub started_at: SystemTime,
    pub ended_at: SystemTime,
    pub violations: Vec<Violation>,
    pub budget: f64,
}

impl RunRecord {
    /// Wall duration of the run in seconds.
    pub fn duration(&self) -> f64 {
        self.ended_at
            .duration_since(self.started_at)
            .unwrap_or_default()
            .as_secs_f64()
    }
}

/// Seconds since the Unix epoch.
pub fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH)
        .unwrap_or_default()
        .as_secs_f64()
}

/// Output of [`score_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRun {
    pub curve: LearningCurve,
    pub alc: f64,
    pub final_nauc: f64,
}

pub fn score_run(
    record: &RunRecord,
    task: &TaskBundle,
    params: ScoringParams,
) -> Result<ScoredRun, MetricsError> {
    let events: Vec<_> = record
        .events
        .iter()
        .map(|e| (e.timestamp, &e.document.matrix))
        .collect();
    let curve = metrics::curve_from_events(&events, &task.solution, params)?;
    Ok(ScoredRun {
        alc: metrics::alc(&curve),
        final_nauc: curve.final_score(),
        curve,
    })
}

/// Environment handed to the solver. Inherited variables that mention the
/// task root or its solution file are dropped.
fn solver_env(
    task: &TaskBundle,
    solver: &SolverCommand,
    shared_dir: &Path,
    budget: f64,
) -> Vec<(OsString, OsString)> {
    let root = task.root.to_string_lossy().into_owned();
    let root_trimmed = root.trim_end_matches('/').to_string();
    let solution = task.solution_path().to_string_lossy().into_owned();
    let leaks = |v: &str| {
        let v = v.trim_end_matches('/');
        v.contains(&solution) || v == root_trimmed
    };
    let mut env: BTreeMap<OsString, OsString> = std::env::vars_os()
        .filter(|(_, v)| !leaks(&v.to_string_lossy()))
        .collect();
    for (k, v) in &solver.env {
        if !leaks(v) {
            env.insert(k.into(), v.into());
        }
    }
    let mut set = |k: &str, v: String| {
        env.insert(k.into(), v.into());
    };
    set(
        ENV_TASK_DIR,
        task.training_path.to_string_lossy().into_owned(),
    );
    set(
        ENV_PREDICTION_DIR,
        shared_dir.to_string_lossy().into_owned(),
    );
    set(ENV_TIME_BUDGET, format!("{budget}"));
    set(ENV_N_TEST, task.metadata.n_test.to_string());
    set(ENV_N_CLASSES, task.metadata.n_classes.to_string());
    env.into_iter().collect()
}

/// Incremental view of the shared directory.
struct Watcher<'a> {
    dir: &'a Path,
    task: &'a TaskBundle,
    seen: BTreeSet<OsString>,
    end_signal_ours: bool,
}

#[derive(Default)]
struct ScanOutcome {
    events: Vec<PredictionEvent>,
    violations: Vec<Violation>,
    forged_end: bool,
}

impl Watcher<'_> {
    fn scan(&mut self, timestamp: f64, budget: f64) -> Result<ScanOutcome, OrchestratorError> {
        let mut out = ScanOutcome::default();
        let mut fresh: Vec<(u64, PathBuf)> = Vec::new();
        for entry in fs::read_dir(self.dir).map_err(io_err(self.dir))? {
            let entry = entry.map_err(io_err(self.dir))?;
            let name = entry.file_name();
            if self.seen.contains(&name) {
                continue;
            }
            let name_str = name.to_string_lossy();
            if name_str.starts_with('.') {
                // in-flight temp file
                continue;
            }
            let path = entry.path();
            if name_str == END_SIGNAL_FILE {
                if !self.end_signal_ours {
                    out.forged_end = true;
                    out.violations.push(Violation {
                        timestamp,
                        kind: ViolationKind::ForgedEndSignal,
                        file: path,
                        message: "solver wrote the ending signal".into(),
                    });
                }
                self.seen.insert(name);
                continue;
            }
            match taskio::sequence_index_of(&name_str) {
                Some(k) => fresh.push((k, path)),
                None => out.violations.push(Violation {
                    timestamp,
                    kind: ViolationKind::UnexpectedFile,
                    file: path,
                    message: format!("`{name_str}` is not an iteration_<k>.predict file"),
                }),
            }
            self.seen.insert(name);
        }
        fresh.sort();
        for (_, path) in fresh {
            match taskio::parse_predictions(&path, &self.task.metadata) {
                Ok(document) if timestamp <= budget => out.events.push(PredictionEvent {
                    timestamp,
                    document,
                }),
                Ok(_) => {}
                Err(e) => out.violations.push(Violation {
                    timestamp,
                    kind: ViolationKind::MalformedPrediction,
                    file: path,
                    message: e.to_string(),
                }),
            }
        }
        Ok(out)
    }
}

fn exit_of(status: ExitStatus) -> RunExit {
    match (status.code(), status.signal()) {
        (Some(0), _) => RunExit::CleanFinish,
        (Some(code), _) => RunExit::Crash(code),
        (None, Some(sig)) => RunExit::Crash(128 + sig),
        (None, None) => RunExit::Crash(-1),
    }
}

/// SIGTERM to the solver's process group, then SIGKILL after `grace`.
fn terminate(child: &mut Child, grace: Duration) -> io::Result<()> {
    let pgid = Pid::from_raw(child.id() as i32);
    let _ = killpg(pgid, Signal::SIGTERM);
    let deadline = Instant::now() + grace;
    loop {
        if child.try_wait()?.is_some() {
            // stragglers in the group
            let _ = killpg(pgid, Signal::SIGKILL);
            return Ok(());
        }
        if Instant::now() >= deadline {
            break;
        }
        thread::sleep(Duration::from_millis(10));
    }
    let _ = killpg(pgid, Signal::SIGKILL);
    child.kill().ok();
    child.wait().map(|_| ())
}

/// Runs `solver` on `task`, using `shared_dir` as the prediction directory.
///
/// The directory is created if missing and must be empty. Solver crashes and
/// malformed prediction files are recorded in the returned [`RunRecord`];
/// only failures of the harness itself are errors.
pub fn run_solver(
    task: &TaskBundle,
    solver: &SolverCommand,
    config: &RunConfig,
    shared_dir: &Path,
) -> Result<RunRecord, OrchestratorError> {
    RunConfig::new(config.budget, config.poll_interval, config.grace_period)?;
    let program = solver
        .argv
        .first()
        .ok_or_else(|| OrchestratorError::InvalidConfig("empty solver argv".into()))?;
    fs::create_dir_all(shared_dir).map_err(io_err(shared_dir))?;
    if fs::read_dir(shared_dir)
        .map_err(io_err(shared_dir))?
        .next()
        .is_some()
    {
        return Err(OrchestratorError::DirectoryNotEmpty(
            shared_dir.to_path_buf(),
        ));
    }

    let mut command = Command::new(program);
    command
        .args(&solver.argv[1..])
        .current_dir(&solver.workdir)
        .env_clear()
        .envs(solver_env(task, solver, shared_dir, config.budget))
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .process_group(0);

    let budget = config.budget;
    let poll = Duration::from_secs_f64(config.poll_interval);
    let started_at = SystemTime::now();
    let start = Instant::now();
    let mut child = command
        .spawn()
        .map_err(|source| OrchestratorError::LaunchFailure {
            program: program.clone(),
            source,
        })?;

    let mut watcher = Watcher {
        dir: shared_dir,
        task,
        seen: BTreeSet::new(),
        end_signal_ours: false,
    };
    let mut events = Vec::new();
    let mut violations = Vec::new();
    let mut absorb = |outcome: ScanOutcome, events: &mut Vec<PredictionEvent>| {
        events.extend(outcome.events);
        violations.extend(outcome.violations);
        outcome.forged_end
    };

    let exit = loop {
        let now = start.elapsed().as_secs_f64();
        let status = child.try_wait().map_err(io_err(shared_dir))?;
        let forged = absorb(watcher.scan(now, budget)?, &mut events);
        if forged {
            break RunExit::ProtocolViolation(ViolationKind::ForgedEndSignal);
        }
        if let Some(status) = status {
            break exit_of(status);
        }
        if now >= budget {
            break RunExit::BudgetKill;
        }
        let remaining = Duration::from_secs_f64(budget - now);
        thread::sleep(poll.min(remaining));
    };

    watcher.end_signal_ours = true;
    let elapsed = start.elapsed().as_secs_f64();
    taskio::write_atomic(
        shared_dir,
        END_SIGNAL_FILE,
        format!("{elapsed}\n").as_bytes(),
    )?;
    if exit != RunExit::CleanFinish && !matches!(exit, RunExit::Crash(_)) {
        terminate(&mut child, Duration::from_secs_f64(config.grace_period))
            .map_err(io_err(shared_dir))?;
    } else {
        // solver already gone; reap anything it left in its group
        let _ = killpg(Pid::from_raw(child.id() as i32), Signal::SIGKILL);
    }
    let ended_at = SystemTime::now();

    events.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    Ok(RunRecord {
        events,
        exit,
        started_at,
        ended_at,
        violations,
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{LabelMatrix, ScoreMatrix};
    use crate::taskio::{Dim, Domain, TaskMetadata, TensorDims};

    fn toy_task(dir: &Path) -> TaskBundle {
        let meta = TaskMetadata {
            name: "toy".into(),
            domain: Domain::Tabular,
            n_classes: 2,
            n_train: 8,
            n_test: 4,
            dims: TensorDims {
                time: Dim::Fixed(1),
                row: Dim::Fixed(1),
                col: Dim::Fixed(5),
                channel: Dim::Fixed(1),
            },
            budget_override: None,
        };
        let labels =
            LabelMatrix::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1]]).unwrap();
        taskio::write_task(dir, &meta, &labels).unwrap();
        taskio::load_task(dir).unwrap()
    }

    fn sh(script: &str, dir: &Path) -> SolverCommand {
        SolverCommand::new(["/bin/sh", "-c", script], dir)
    }

    const VALID: &str = "printf '1 0\\n0 1\\n1 0\\n0 1\\n' > \"$PREDICTION_DIR/.t\"; mv \"$PREDICTION_DIR/.t\" \"$PREDICTION_DIR/iteration_{K}.predict\"";

    fn valid(k: u32) -> String {
        VALID.replace("{K}", &k.to_string())
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::new(10.0, 0.05, 5.0).is_ok());
        assert!(RunConfig::new(1.0, 0.05, 5.0).is_err());
        assert!(RunConfig::new(0.0, 0.05, 0.0).is_err());
        let d = RunConfig::default();
        assert_eq!(
            (d.budget, d.poll_interval, d.grace_period),
            (1200.0, 0.05, 5.0)
        );
    }

    #[test]
    fn single_file_then_budget_kill() {
        let root = tempfile::tempdir().unwrap();
        let task = toy_task(&root.path().join("task"));
        let shared = root.path().join("shared");
        let solver = sh(&format!("{}; sleep 30", valid(0)), root.path());
        let config = RunConfig::new(1.0, 0.02, 0.5).unwrap();
        let started = Instant::now();
        let record = run_solver(&task, &solver, &config, &shared).unwrap();
        assert!(started.elapsed().as_secs_f64() < 1.0 + 0.5 + 1.0);
        assert_eq!(record.events.len(), 1);
        assert_eq!(record.exit, RunExit::BudgetKill);
        assert!(record.events[0].timestamp < 0.5);
        assert!(shared.join(END_SIGNAL_FILE).exists());
        let scored = score_run(&record, &task, ScoringParams::new(1.0, 0.1).unwrap()).unwrap();
        assert_eq!(scored.final_nauc, 1.0);
    }

    #[test]
    fn clean_finish_after_two_files() {
        let root = tempfile::tempdir().unwrap();
        let task = toy_task(&root.path().join("task"));
        let shared = root.path().join("shared");
        let solver = sh(
            &format!("{}; sleep 0.2; {}; exit 0", valid(0), valid(1)),
            root.path(),
        );
        let record = run_solver(
            &task,
            &solver,
            &RunConfig::new(10.0, 0.02, 1.0).unwrap(),
            &shared,
        )
        .unwrap();
        assert_eq!(record.events.len(), 2);
        assert_eq!(record.exit, RunExit::CleanFinish);
        assert!(record.duration() < 5.0);
        assert!(record.events[0].timestamp <= record.events[1].timestamp);
        assert_eq!(record.events[1].document.sequence_index, 1);
    }

    #[test]
    fn malformed_file_is_a_violation_not_a_failure() {
        let root = tempfile::tempdir().unwrap();
        let task = toy_task(&root.path().join("task"));
        let shared = root.path().join("shared");
        let bad = "printf '1 0\\n0 1\\n' > \"$PREDICTION_DIR/.b\"; mv \"$PREDICTION_DIR/.b\" \"$PREDICTION_DIR/iteration_0.predict\"";
        let solver = sh(&format!("{bad}; sleep 0.1; {}", valid(1)), root.path());
        let record = run_solver(
            &task,
            &solver,
            &RunConfig::new(10.0, 0.02, 1.0).unwrap(),
            &shared,
        )
        .unwrap();
        assert_eq!(record.events.len(), 1);
        assert_eq!(record.violations.len(), 1);
        assert_eq!(
            record.violations[0].kind,
            ViolationKind::MalformedPrediction
        );
        assert_eq!(record.exit, RunExit::CleanFinish);
    }

    #[test]
    fn crash_is_recorded() {
        let root = tempfile::tempdir().unwrap();
        let task = toy_task(&root.path().join("task"));
        let solver = sh(&format!("{}; exit 3", valid(0)), root.path());
        let record = run_solver(
            &task,
            &solver,
            &RunConfig::new(10.0, 0.02, 1.0).unwrap(),
            &root.path().join("s"),
        )
        .unwrap();
        assert_eq!(record.exit, RunExit::Crash(3));
        assert_eq!(record.events.len(), 1);
    }

    #[test]
    fn forged_end_signal_stops_the_run() {
        let root = tempfile::tempdir().unwrap();
        let task = toy_task(&root.path().join("task"));
        let solver = sh(
            "echo 0 > \"$PREDICTION_DIR/end.txt\"; sleep 30",
            root.path(),
        );
        let started = Instant::now();
        let record = run_solver(
            &task,
            &solver,
            &RunConfig::new(20.0, 0.02, 1.0).unwrap(),
            &root.path().join("s"),
        )
        .unwrap();
        assert!(started.elapsed().as_secs_f64() < 5.0);
        assert_eq!(
            record.exit,
            RunExit::ProtocolViolation(ViolationKind::ForgedEndSignal)
        );
    }

    #[test]
    fn unexpected_files_are_flagged() {
        let root = tempfile::tempdir().unwrap();
        let task = toy_task(&root.path().join("task"));
        let solver = sh("echo hi > \"$PREDICTION_DIR/notes.log\"", root.path());
        let record = run_solver(
            &task,
            &solver,
            &RunConfig::new(10.0, 0.02, 1.0).unwrap(),
            &root.path().join("s"),
        )
        .unwrap();
        assert_eq!(record.violations.len(), 1);
        assert_eq!(record.violations[0].kind, ViolationKind::UnexpectedFile);
    }

    #[test]
    fn launch_failure_and_dirty_directory() {
        let root = tempfile::tempdir().unwrap();
        let task = toy_task(&root.path().join("task"));
        let solver = SolverCommand::new(["/nonexistent/solver"], root.path());
        let err = run_solver(
            &task,
            &solver,
            &RunConfig::new(1.0, 0.02, 0.5).unwrap(),
            &root.path().join("s"),
        )
        .unwrap_err();
        assert!(matches!(err, OrchestratorError::LaunchFailure { .. }));

        let dirty = root.path().join("dirty");
        fs::create_dir_all(&dirty).unwrap();
        fs::write(dirty.join("x"), "").unwrap();
        let err = run_solver(
            &task,
            &sh("true", root.path()),
            &RunConfig::new(1.0, 0.02, 0.5).unwrap(),
            &dirty,
        )
        .unwrap_err();
        assert!(matches!(err, OrchestratorError::DirectoryNotEmpty(_)));
    }

    #[test]
    fn solver_env_hides_solution() {
        let root = tempfile::tempdir().unwrap();
        let task = toy_task(&root.path().join("task"));
        let shared = root.path().join("shared");
        let dump = root.path().join("env.txt");
        let mut solver = sh(&format!("env > {}", dump.display()), root.path());
        solver
            .env
            .insert("SNEAKY".into(), task.solution_path().display().to_string());
        solver
            .env
            .insert("ROOT".into(), task.root.display().to_string());
        run_solver(
            &task,
            &solver,
            &RunConfig::new(10.0, 0.02, 1.0).unwrap(),
            &shared,
        )
        .unwrap();
        let env = fs::read_to_string(&dump).unwrap();
        assert!(!env.contains("solution.txt"));
        assert!(!env.contains("SNEAKY=") && !env.contains("ROOT="));
        assert!(env.contains(&format!("TASK_DIR={}", task.training_path.display())));
        assert!(env.contains(&format!("PREDICTION_DIR={}", shared.display())));
        assert!(env.contains("TIME_BUDGET_SECONDS=10\n"));
        assert!(env.contains("N_TEST=4\n") && env.contains("N_CLASSES=2\n"));
    }

    #[test]
    fn stubborn_solver_is_killed_after_grace() {
        let root = tempfile::tempdir().unwrap();
        let task = toy_task(&root.path().join("task"));
        let solver = sh("trap '' TERM; while true; do sleep 0.05; done", root.path());
        let config = RunConfig::new(0.5, 0.02, 0.5).unwrap();
        let started = Instant::now();
        let record = run_solver(&task, &solver, &config, &root.path().join("s")).unwrap();
        let wall = started.elapsed().as_secs_f64();
        assert_eq!(record.exit, RunExit::BudgetKill);
        assert!(wall >= 0.9 && wall < 0.5 + 0.5 + 0.5, "wall {wall}");
    }

    #[test]
    fn scoring_empty_record() {
        let root = tempfile::tempdir().unwrap();
        let task = toy_task(root.path());
        let record = RunRecord {
            events: vec![],
            exit: RunExit::CleanFinish,
            started_at: UNIX_EPOCH,
            ended_at: UNIX_EPOCH,
            violations: vec![],
            budget: 1200.0,
        };
        let scored = score_run(&record, &task, ScoringParams::default()).unwrap();
        assert!(scored.curve.is_empty());
        assert_eq!((scored.alc, scored.final_nauc), (0.0, 0.0));

        let perfect = ScoreMatrix::from(&task.solution);
        let record = RunRecord {
            events: vec![PredictionEvent {
                timestamp: 0.0,
                document: PredictionDocument {
                    matrix: perfect,
                    source_path: "p".into(),
                    sequence_index: 0,
                },
            }],
            ..record
        };
        let scored = score_run(&record, &task, ScoringParams::default()).unwrap();
        assert_eq!((scored.alc, scored.final_nauc), (1.0, 1.0));
    }
}
