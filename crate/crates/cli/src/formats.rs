//! File formats exchanged by the commands.
//!
//! ```text
//! events file     <timestamp> <prediction path>      one event per line, `#` comments
//! results.csv     team,task,repeat,alc
//! exclusions.csv  team,task,repeat
//! archive.csv     method,task,repeat,budget,timestamp,score   (empty timestamp/score: empty curve)
//! matrix csv      config,<dataset>,<dataset>,...
//! features csv    dataset,rows,cols,n_classes,n_train,n_test,sequence_length
//! ```
//!
//! Relative paths in an events file resolve against the file's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anytime_bench::metrics::CurvePoint;
use anytime_bench::portfolio::{MetaFeatures, PerformanceMatrix};
use anytime_bench::ranking::ResultTable;
use anytime_bench::studies::CurveArchive;
use anytime_bench::taskio;
use serde::Deserialize;

use crate::CliError;

pub const RESULTS_FILE: &str = "results.csv";
pub const EXCLUSIONS_FILE: &str = "exclusions.csv";
pub const ARCHIVE_FILE: &str = "archive.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct EventLine {
    /// 1-based line number in the events file.
    pub line: usize,
    pub timestamp: f64,
    pub path: PathBuf,
}

pub fn read_events(path: &Path) -> Result<Vec<EventLine>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Harness(format!("{}: {e}", path.display())))?;
    parse_events(&text, path)
}

pub fn parse_events(text: &str, path: &Path) -> Result<Vec<EventLine>, CliError> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |m: String| CliError::Harness(format!("{}: row {line}: {m}", path.display()));
        let Some((t, file)) = trimmed.split_once(char::is_whitespace) else {
            return Err(err("expected `<timestamp> <path>`".into()));
        };
        let timestamp: f64 = t
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| err(format!("invalid timestamp `{t}`")))?;
        let file = Path::new(file.trim());
        events.push(EventLine {
            line,
            timestamp,
            path: if file.is_absolute() {
                file.to_path_buf()
            } else {
                base.join(file)
            },
        });
    }
    Ok(events)
}

pub fn render_events<'a>(events: impl IntoIterator<Item = (f64, &'a str)>) -> String {
    events
        .into_iter()
        .map(|(t, p)| format!("{t} {p}\n"))
        .collect()
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>, CliError> {
    if !path.is_file() {
        return Err(CliError::Usage(format!("{}: no such file", path.display())));
    }
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.position() {
        Some(pos) => CliError::Harness(format!("{}: row {}: {e}", path.display(), pos.line())),
        None => CliError::Harness(format!("{}: {e}", path.display())),
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    reader(path)?
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| csv_err(path, e))
}

/// Renders rows with the `csv` writer; the first row is the header.
pub fn csv_string<I, R, S>(records: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.write_record(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 input")
}

fn push_unique(ids: &mut Vec<String>, id: &str) {
    if !ids.iter().any(|x| x == id) {
        ids.push(id.to_string());
    }
}

#[derive(Deserialize)]
struct ResultRow {
    team: String,
    task: String,
    repeat: usize,
    alc: f64,
}

#[derive(Deserialize)]
struct ExclusionRow {
    team: String,
    task: String,
    repeat: usize,
}

/// Reads `results.csv` and applies `exclusions.csv` when present. Teams and
/// tasks keep their order of first appearance.
pub fn read_results(dir: &Path) -> Result<ResultTable, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Usage(format!(
            "{}: no such directory",
            dir.display()
        )));
    }
    let path = dir.join(RESULTS_FILE);
    let rows: Vec<ResultRow> = read_rows(&path)?;
    let (mut teams, mut tasks) = (Vec::new(), Vec::new());
    for r in &rows {
        push_unique(&mut teams, &r.team);
        push_unique(&mut tasks, &r.task);
    }
    let mut table = ResultTable::new(teams, tasks)
        .map_err(|e| CliError::Harness(format!("{}: {e}", path.display())))?;
    for (i, r) in rows.iter().enumerate() {
        table
            .set(&r.team, &r.task, r.repeat, r.alc)
            .map_err(|e| CliError::Harness(format!("{}: row {}: {e}", path.display(), i + 2)))?;
    }
    let excl = dir.join(EXCLUSIONS_FILE);
    if excl.is_file() {
        for (i, r) in read_rows::<ExclusionRow>(&excl)?.iter().enumerate() {
            let row = i + 2;
            let removed = table
                .exclude(&r.team, &r.task, r.repeat)
                .map_err(|e| CliError::Harness(format!("{}: row {row}: {e}", excl.display())))?;
            if !removed {
                return Err(CliError::Harness(format!(
                    "{}: row {row}: no result for ({}, {}, {})",
                    excl.display(),
                    r.team,
                    r.task,
                    r.repeat
                )));
            }
        }
    }
    Ok(table)
}

#[derive(Deserialize)]
struct ArchiveRow {
    method: String,
    task: String,
    repeat: usize,
    budget: f64,
    timestamp: Option<f64>,
    score: Option<f64>,
}

type ArchiveKey = (String, String, usize);

pub fn read_archive(path: &Path) -> Result<CurveArchive, CliError> {
    let rows: Vec<ArchiveRow> = read_rows(path)?;
    let mut curves: BTreeMap<ArchiveKey, (f64, Vec<CurvePoint>)> = BTreeMap::new();
    for (i, r) in rows.into_iter().enumerate() {
        let err = |m: String| CliError::Harness(format!("{}: row {}: {m}", path.display(), i + 2));
        let entry = curves
            .entry((r.method, r.task, r.repeat))
            .or_insert_with(|| (r.budget, Vec::new()));
        if entry.0 != r.budget {
            return Err(err(format!(
                "budget {} differs from {} earlier in the curve",
                r.budget, entry.0
            )));
        }
        match (r.timestamp, r.score) {
            (Some(timestamp), Some(score)) => entry.1.push(CurvePoint { timestamp, score }),
            (None, None) => {}
            _ => {
                return Err(err(
                    "timestamp and score must both be set or both be empty".into()
                ))
            }
        }
    }
    let mut archive = CurveArchive::new();
    for ((method, task, repeat), (budget, points)) in curves {
        archive
            .insert_points(&method, &task, repeat, budget, points)
            .map_err(|e| {
                CliError::Harness(format!(
                    "{}: ({method}, {task}, {repeat}): {e}",
                    path.display()
                ))
            })?;
    }
    Ok(archive)
}

pub fn render_archive(archive: &CurveArchive) -> String {
    let mut records = vec![["method", "task", "repeat", "budget", "timestamp", "score"]
        .map(String::from)
        .to_vec()];
    for ((method, task, repeat), curve) in archive.iter() {
        let key = [
            method.clone(),
            task.clone(),
            repeat.to_string(),
            curve.budget.to_string(),
        ];
        if curve.points.is_empty() {
            records.push([key.to_vec(), vec![String::new(), String::new()]].concat());
        }
        for p in &curve.points {
            records.push(
                [
                    key.to_vec(),
                    vec![p.timestamp.to_string(), p.score.to_string()],
                ]
                .concat(),
            );
        }
    }
    csv_string(records)
}

pub fn read_matrix(path: &Path) -> Result<PerformanceMatrix, CliError> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.get(0) != Some("config") {
        return Err(CliError::Harness(format!(
            "{}: first column must be `config`",
            path.display()
        )));
    }
    let datasets: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let (mut configs, mut alc) = (Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        configs.push(record[0].to_string());
        let row = record
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Harness(format!("{}: row {line}: {e}", path.display())))?;
        alc.push(row);
    }
    PerformanceMatrix::new(configs, datasets, alc)
        .map_err(|e| CliError::Harness(format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
struct FeatureRow {
    dataset: String,
    rows: u64,
    cols: u64,
    n_classes: u64,
    n_train: u64,
    n_test: u64,
    sequence_length: u64,
}

pub fn read_features(path: &Path) -> Result<BTreeMap<String, MetaFeatures>, CliError> {
    let mut out = BTreeMap::new();
    for (i, r) in read_rows::<FeatureRow>(path)?.into_iter().enumerate() {
        let f = MetaFeatures {
            resolution: (r.rows, r.cols),
            n_classes: r.n_classes,
            n_train: r.n_train,
            n_test: r.n_test,
            sequence_length: r.sequence_length,
        };
        let err = |m: String| CliError::Harness(format!("{}: row {}: {m}", path.display(), i + 2));
        f.validate().map_err(|e| err(e.to_string()))?;
        if out.insert(r.dataset.clone(), f).is_some() {
            return Err(err(format!("duplicate dataset `{}`", r.dataset)));
        }
    }
    Ok(out)
}

/// Writes a report file atomically, creating `dir` if needed.
pub fn write_report(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Harness(format!("{}: {e}", dir.display())))?;
    taskio::write_atomic(dir, name, contents.as_bytes())
        .map_err(|e| CliError::Harness(e.to_string()))
}

/// One JSON document per line.
pub fn jsonl<T: serde::Serialize>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|i| serde_json::to_string(&i).expect("serializable report") + "\n")
        .collect()
}
