#![allow(dead_code)]

use std::path::{Path, PathBuf};

use anytime_bench::metrics::{LabelMatrix, ScoreMatrix};
use anytime_bench::orchestrator::{ClockMode, ScriptedSolver};
use anytime_bench::taskio::{self, Dim, Domain, TaskBundle, TaskMetadata, TensorDims};

pub const SCRIPTED_SOLVER: &str = env!("CARGO_BIN_EXE_scripted-solver");
pub const CLI: &str = env!("CARGO_BIN_EXE_anytime-bench");

pub fn metadata(name: &str, n_test: usize, n_classes: usize, budget: Option<f64>) -> TaskMetadata {
    TaskMetadata {
        name: name.into(),
        domain: Domain::Image,
        n_classes,
        n_train: 10,
        n_test,
        dims: TensorDims {
            time: Dim::Fixed(1),
            row: Dim::Fixed(8),
            col: Dim::Fixed(8),
            channel: Dim::Fixed(3),
        },
        budget_override: budget,
    }
}

pub fn write_task(root: &Path, name: &str, labels: &[Vec<u8>], budget: Option<f64>) -> TaskBundle {
    let solution = LabelMatrix::from_rows(labels).unwrap();
    let meta = metadata(name, solution.rows(), solution.cols(), budget);
    taskio::write_task(root, &meta, &solution).unwrap();
    taskio::load_task(root).unwrap()
}

/// 4 test rows, 2 classes, both classes mixed.
pub fn small_task(root: &Path, budget: Option<f64>) -> TaskBundle {
    write_task(
        root,
        "small",
        &[vec![1, 0], vec![0, 1], vec![1, 1], vec![0, 0]],
        budget,
    )
}

/// Scores for `small_task` with the given ordering quality.
pub fn small_scores(perfect: bool) -> ScoreMatrix {
    if perfect {
        ScoreMatrix::from_rows(&[
            vec![0.9, 0.1],
            vec![0.2, 0.8],
            vec![0.7, 0.6],
            vec![0.1, 0.3],
        ])
        .unwrap()
    } else {
        ScoreMatrix::from_rows(&[
            vec![0.4, 0.1],
            vec![0.6, 0.8],
            vec![0.7, 0.2],
            vec![0.1, 0.3],
        ])
        .unwrap()
    }
}

/// One class, 10 positives then 10 negatives.
pub fn pair_task(root: &Path, budget: Option<f64>) -> TaskBundle {
    let labels: Vec<Vec<u8>> = (0..20).map(|i| vec![u8::from(i < 10)]).collect();
    write_task(root, "pairs", &labels, budget)
}

/// Scores for `pair_task` in which exactly `wins` of the 100 (positive,
/// negative) pairs are ordered correctly, so NAUC = wins / 50 - 1.
pub fn pair_scores(wins: usize) -> ScoreMatrix {
    assert!(wins <= 100);
    let mut rows = Vec::with_capacity(20);
    let mut left = wins;
    for _ in 0..10 {
        let beat = left.min(10);
        left -= beat;
        rows.push(vec![beat as f64 - 0.5]);
    }
    for j in 0..10 {
        rows.push(vec![j as f64]);
    }
    ScoreMatrix::from_rows(&rows).unwrap()
}

/// Writes one prediction file per matrix under `dir` and an events file
/// listing them at `times`.
pub fn write_events(dir: &Path, events: &[(f64, &ScoreMatrix)]) -> PathBuf {
    let preds = dir.join("preds");
    std::fs::create_dir_all(&preds).unwrap();
    let mut text = String::from("# timestamp path\n");
    for (k, (t, m)) in events.iter().enumerate() {
        taskio::write_predictions(m, &preds, k as u64).unwrap();
        text.push_str(&format!(
            "{t} preds/{}\n",
            taskio::prediction_file_name(k as u64)
        ));
    }
    let path = dir.join("events.txt");
    std::fs::write(&path, text).unwrap();
    path
}

/// Argv that plays `schedule` through the scripted-solver binary.
pub fn scripted_argv(schedule: Vec<(f64, ScoreMatrix)>, fixture_dir: &Path) -> Vec<String> {
    let solver = ScriptedSolver::new(schedule, ClockMode::RealSubprocess);
    solver
        .command(Path::new(SCRIPTED_SOLVER), fixture_dir)
        .unwrap()
        .argv
}

pub fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref())
        .unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

pub fn write(path: impl AsRef<Path>, contents: &str) {
    let path = path.as_ref();
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, contents).unwrap();
}
