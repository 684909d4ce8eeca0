//! Scripted solvers: a fixed schedule of (delay, predictions) pairs that can
//! either be replayed on a virtual clock or played by a real subprocess.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant, UNIX_EPOCH};

use thiserror::Error;

use super::{
    run_solver, OrchestratorError, PredictionEvent, RunConfig, RunExit, RunRecord, SolverCommand,
    Violation, ViolationKind, END_SIGNAL_FILE,
};
use crate::metrics::ScoreMatrix;
use crate::taskio::{self, PredictionDocument, TaskBundle, TaskError};

/// Schedule file name inside a fixture directory.
pub const SCHEDULE_FILE: &str = "schedule.txt";

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Task(#[from] TaskError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockMode {
    VirtualClock,
    RealSubprocess,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedSolver {
    /// Delay since the previous step, then the predictions to publish.
    pub schedule: Vec<(f64, ScoreMatrix)>,
    pub mode: ClockMode,
    /// Keep running after the last step until terminated.
    pub linger: bool,
}

impl ScriptedSolver {
    pub fn new(schedule: Vec<(f64, ScoreMatrix)>, mode: ClockMode) -> Self {
        Self {
            schedule,
            mode,
            linger: false,
        }
    }

    /// Cumulative event times.
    pub fn event_times(&self) -> Vec<f64> {
        self.schedule
            .iter()
            .scan(0.0, |acc, (delay, _)| {
                *acc += delay;
                Some(*acc)
            })
            .collect()
    }

    /// Writes the matrices and a schedule file into `fixture_dir` and returns
    /// the path of the schedule file.
    pub fn write_fixture(&self, fixture_dir: &Path) -> Result<PathBuf, ScheduleError> {
        fs::create_dir_all(fixture_dir).map_err(|source| TaskError::Io {
            path: fixture_dir.to_path_buf(),
            source,
        })?;
        let mut schedule = String::new();
        if self.linger {
            schedule.push_str("linger\n");
        }
        for (k, (delay, matrix)) in self.schedule.iter().enumerate() {
            let name = format!("step_{k}.txt");
            taskio::write_atomic(
                fixture_dir,
                &name,
                taskio::render_predictions(matrix).as_bytes(),
            )?;
            schedule.push_str(&format!("{delay} {name}\n"));
        }
        Ok(taskio::write_atomic(
            fixture_dir,
            SCHEDULE_FILE,
            schedule.as_bytes(),
        )?)
    }

    /// Command line that plays this schedule with the `player` executable.
    pub fn command(
        &self,
        player: &Path,
        fixture_dir: &Path,
    ) -> Result<SolverCommand, ScheduleError> {
        let schedule = self.write_fixture(fixture_dir)?;
        Ok(SolverCommand::new(
            [
                player.to_string_lossy().into_owned(),
                "--schedule".into(),
                schedule.to_string_lossy().into_owned(),
            ],
            fixture_dir,
        ))
    }

    /// Runs the schedule in its configured mode. `player` and `work_dir` are
    /// only used for real subprocesses.
    pub fn run(
        &self,
        task: &TaskBundle,
        config: &RunConfig,
        player: &Path,
        work_dir: &Path,
    ) -> Result<RunRecord, OrchestratorError> {
        match self.mode {
            ClockMode::VirtualClock => Ok(simulate_run(task, self, config)),
            ClockMode::RealSubprocess => {
                let command = self.command(player, &work_dir.join("fixture"))?;
                run_solver(task, &command, config, &work_dir.join("predictions"))
            }
        }
    }
}

/// Replays a schedule on a virtual clock: events land exactly at the
/// cumulative delays and nothing waits on real time.
pub fn simulate_run(task: &TaskBundle, scripted: &ScriptedSolver, config: &RunConfig) -> RunRecord {
    let meta = &task.metadata;
    let mut events = Vec::new();
    let mut violations = Vec::new();
    let times = scripted.event_times();
    for (k, (t, (_, matrix))) in times.iter().zip(&scripted.schedule).enumerate() {
        if *t > config.budget {
            continue;
        }
        let source_path = PathBuf::from(taskio::prediction_file_name(k as u64));
        if matrix.rows() != meta.n_test || matrix.cols() != meta.n_classes {
            violations.push(Violation {
                timestamp: *t,
                kind: ViolationKind::MalformedPrediction,
                file: source_path,
                message: format!(
                    "expected {}x{}, got {}x{}",
                    meta.n_test,
                    meta.n_classes,
                    matrix.rows(),
                    matrix.cols()
                ),
            });
            continue;
        }
        events.push(PredictionEvent {
            timestamp: *t,
            document: PredictionDocument {
                matrix: matrix.clone(),
                source_path,
                sequence_index: k as u64,
            },
        });
    }
    events.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    let last = times.last().copied().unwrap_or(0.0);
    let (exit, duration) = if scripted.linger || last > config.budget {
        (RunExit::BudgetKill, config.budget)
    } else {
        (RunExit::CleanFinish, last)
    };
    RunRecord {
        events,
        exit,
        started_at: UNIX_EPOCH,
        ended_at: UNIX_EPOCH + Duration::from_secs_f64(duration),
        violations,
        budget: config.budget,
    }
}

fn parse_schedule(path: &Path) -> Result<(bool, Vec<(f64, PathBuf)>), ScheduleError> {
    let text = fs::read_to_string(path).map_err(|source| TaskError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut linger = false;
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "linger" {
            linger = true;
            continue;
        }
        let err = |message: String| ScheduleError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let (delay, file) = line
            .split_once(' ')
            .ok_or_else(|| err("expected `<delay> <file>`".into()))?;
        let delay: f64 = delay
            .parse()
            .ok()
            .filter(|d: &f64| d.is_finite() && *d >= 0.0)
            .ok_or_else(|| err(format!("bad delay `{delay}`")))?;
        steps.push((delay, base.join(file.trim())));
    }
    Ok((linger, steps))
}

/// Solver side of a scripted run: waits out each delay, then publishes the
/// step's predictions into `prediction_dir` with temp-then-rename. Stops
/// early if the ending signal appears.
pub fn play_schedule(schedule: &Path, prediction_dir: &Path) -> Result<(), ScheduleError> {
    let (linger, steps) = parse_schedule(schedule)?;
    let start = Instant::now();
    let ended = || prediction_dir.join(END_SIGNAL_FILE).exists();
    let mut due = 0.0;
    for (k, (delay, file)) in steps.iter().enumerate() {
        due += delay;
        let contents = fs::read(file).map_err(|source| TaskError::Io {
            path: file.clone(),
            source,
        })?;
        loop {
            if ended() {
                return Ok(());
            }
            let now = start.elapsed().as_secs_f64();
            if now >= due {
                break;
            }
            thread::sleep(Duration::from_secs_f64((due - now).min(0.01)));
        }
        taskio::write_atomic(
            prediction_dir,
            &taskio::prediction_file_name(k as u64),
            &contents,
        )?;
    }
    while linger && !ended() {
        thread::sleep(Duration::from_millis(10));
    }
    Ok(())
}
