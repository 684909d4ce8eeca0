//! On-disk task bundles and the prediction file format.
//!
//! A bundle is a directory:
//!
//! ```text
//! <root>/metadata.txt   key=value lines (name, domain, n_classes, n_train, n_test, dims, budget)
//! <root>/solution.txt   n_test lines of n_classes space-separated 0/1 labels
//! <root>/train/         opaque payload handed to the solver, never read here
//! ```
//!
//! Prediction files are UTF-8 with LF line endings: one test example per line,
//! `n_classes` space-separated decimal reals, named `iteration_<k>.predict`.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{LabelMatrix, ScoreMatrix};

pub const METADATA_FILE: &str = "metadata.txt";
pub const SOLUTION_FILE: &str = "solution.txt";
pub const TRAIN_DIR: &str = "train";
pub const PREDICTION_PREFIX: &str = "iteration_";
pub const PREDICTION_SUFFIX: &str = ".predict";

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}:{line}: field `{field}`: {message}", path.display())]
    MetadataParse {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },
    #[error("{}: solution shape error: {message}", path.display())]
    SolutionShape { path: PathBuf, message: String },
    #[error("{}: bad prediction shape: {message}", path.display())]
    BadPredictionShape { path: PathBuf, message: String },
    #[error("{}: row {row}, column {col}: invalid number `{token}`", path.display())]
    InvalidNumber {
        path: PathBuf,
        row: usize,
        col: usize,
        token: String,
    },
    #[error("{}: row {row}, column {col}: non-finite score `{token}`", path.display())]
    NonFiniteScore {
        path: PathBuf,
        row: usize,
        col: usize,
        token: String,
    },
    #[error("{}: file is not valid UTF-8", .0.display())]
    Encoding(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl TaskError {
    fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            TaskError::MissingFile(path.to_path_buf())
        } else {
            TaskError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Image,
    Video,
    Speech,
    Text,
    Tabular,
    Other,
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "image" => Domain::Image,
            "video" => Domain::Video,
            "speech" => Domain::Speech,
            "text" => Domain::Text,
            "tabular" => Domain::Tabular,
            "other" => Domain::Other,
            _ => return Err(format!("unknown domain `{s}`")),
        })
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Image => "image",
            Domain::Video => "video",
            Domain::Speech => "speech",
            Domain::Text => "text",
            Domain::Tabular => "tabular",
            Domain::Other => "other",
        })
    }
}

/// One tensor dimension; `var` in files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dim {
    Fixed(u64),
    Variable,
}

impl FromStr for Dim {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "var" {
            return Ok(Dim::Variable);
        }
        match s.parse::<u64>() {
            Ok(0) | Err(_) => Err(format!("expected a positive integer or `var`, got `{s}`")),
            Ok(n) => Ok(Dim::Fixed(n)),
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Fixed(n) => write!(f, "{n}"),
            Dim::Variable => f.write_str("var"),
        }
    }
}

/// Tensor shape as (time, row, col, channel).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorDims {
    pub time: Dim,
    pub row: Dim,
    pub col: Dim,
    pub channel: Dim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetadata {
    pub name: String,
    pub domain: Domain,
    pub n_classes: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub dims: TensorDims,
    pub budget_override: Option<f64>,
}

impl TaskMetadata {
    pub fn parse(text: &str, path: &Path) -> Result<Self, TaskError> {
        let err = |line: usize, field: &str, message: String| TaskError::MetadataParse {
            path: path.to_path_buf(),
            line,
            field: field.to_string(),
            message,
        };
        let mut name = None;
        let mut domain = None;
        let mut n_classes = None;
        let mut n_train = None;
        let mut n_test = None;
        let mut dims = None;
        let mut budget_override = None;

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(line_no, line, "expected `key=value`".into()));
            };
            let (key, value) = (key.trim(), value.trim());
            let count = |v: &str| -> Result<usize, TaskError> {
                match v.parse::<usize>() {
                    Ok(n) if n >= 1 => Ok(n),
                    _ => Err(err(
                        line_no,
                        key,
                        format!("expected a positive integer, got `{v}`"),
                    )),
                }
            };
            match key {
                "name" if !value.is_empty() => name = Some(value.to_string()),
                "name" => return Err(err(line_no, key, "empty name".into())),
                "domain" => {
                    domain = Some(value.parse::<Domain>().map_err(|m| err(line_no, key, m))?)
                }
                "n_classes" => n_classes = Some(count(value)?),
                "n_train" => n_train = Some(count(value)?),
                "n_test" => n_test = Some(count(value)?),
                "dims" => {
                    let parsed = value
                        .split_whitespace()
                        .map(Dim::from_str)
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|m| err(line_no, key, m))?;
                    let [time, row, col, channel] = parsed[..] else {
                        return Err(err(
                            line_no,
                            key,
                            format!("expected 4 entries, got {}", parsed.len()),
                        ));
                    };
                    dims = Some(TensorDims {
                        time,
                        row,
                        col,
                        channel,
                    });
                }
                "budget" => match value.parse::<f64>() {
                    Ok(b) if b.is_finite() && b > 0.0 => budget_override = Some(b),
                    _ => {
                        return Err(err(
                            line_no,
                            key,
                            format!("expected positive seconds, got `{value}`"),
                        ))
                    }
                },
                _ => return Err(err(line_no, key, "unknown field".into())),
            }
        }

        let missing = |field: &str| err(0, field, "missing required field".into());
        Ok(TaskMetadata {
            name: name.ok_or_else(|| missing("name"))?,
            domain: domain.ok_or_else(|| missing("domain"))?,
            n_classes: n_classes.ok_or_else(|| missing("n_classes"))?,
            n_train: n_train.ok_or_else(|| missing("n_train"))?,
            n_test: n_test.ok_or_else(|| missing("n_test"))?,
            dims: dims.ok_or_else(|| missing("dims"))?,
            budget_override,
        })
    }

    /// Renders the metadata file; `parse(render(m)) == m`.
    pub fn render(&self) -> String {
        let d = &self.dims;
        let mut out = format!(
            "name={}\ndomain={}\nn_classes={}\nn_train={}\nn_test={}\ndims={} {} {} {}\n",
            self.name,
            self.domain,
            self.n_classes,
            self.n_train,
            self.n_test,
            d.time,
            d.row,
            d.col,
            d.channel
        );
        if let Some(b) = self.budget_override {
            out.push_str(&format!("budget={b}\n"));
        }
        out
    }
}

/// A loaded task: metadata, hidden solution and the solver-visible payload path.
#[derive(Debug, Clone)]
pub struct TaskBundle {
    pub root: PathBuf,
    pub metadata: TaskMetadata,
    /// Handed to the solver as-is; never opened by this crate.
    pub training_path: PathBuf,
    pub solution: LabelMatrix,
}

impl TaskBundle {
    pub fn solution_path(&self) -> PathBuf {
        self.root.join(SOLUTION_FILE)
    }
}

fn read_utf8(path: &Path) -> Result<String, TaskError> {
    let bytes = fs::read(path).map_err(|e| TaskError::io(path, e))?;
    String::from_utf8(bytes).map_err(|_| TaskError::Encoding(path.to_path_buf()))
}

pub fn load_task(root: &Path) -> Result<TaskBundle, TaskError> {
    let meta_path = root.join(METADATA_FILE);
    let metadata = TaskMetadata::parse(&read_utf8(&meta_path)?, &meta_path)?;

    let sol_path = root.join(SOLUTION_FILE);
    let text = read_utf8(&sol_path)?;
    let shape_err = |message: String| TaskError::SolutionShape {
        path: sol_path.clone(),
        message,
    };
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() != metadata.n_test {
        return Err(shape_err(format!(
            "expected {} rows (n_test), found {}",
            metadata.n_test,
            lines.len()
        )));
    }
    let mut values = Vec::with_capacity(metadata.n_test * metadata.n_classes);
    for (r, line) in lines.iter().enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != metadata.n_classes {
            return Err(shape_err(format!(
                "row {}: expected {} labels (n_classes), found {}",
                r + 1,
                metadata.n_classes,
                tokens.len()
            )));
        }
        for (c, tok) in tokens.iter().enumerate() {
            values.push(match *tok {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(shape_err(format!(
                        "row {}, column {}: label must be 0 or 1, got `{other}`",
                        r + 1,
                        c + 1
                    )))
                }
            });
        }
    }
    let solution = LabelMatrix::new(metadata.n_test, metadata.n_classes, values)
        .map_err(|e| shape_err(e.to_string()))?;

    Ok(TaskBundle {
        root: root.to_path_buf(),
        training_path: root.join(TRAIN_DIR),
        metadata,
        solution,
    })
}

/// Writes a bundle directory; the training payload directory is created empty.
pub fn write_task(
    root: &Path,
    metadata: &TaskMetadata,
    solution: &LabelMatrix,
) -> Result<(), TaskError> {
    fs::create_dir_all(root.join(TRAIN_DIR)).map_err(|e| TaskError::io(root, e))?;
    let meta_path = root.join(METADATA_FILE);
    fs::write(&meta_path, metadata.render()).map_err(|e| TaskError::io(&meta_path, e))?;
    let mut text = String::new();
    for r in 0..solution.rows() {
        let row: Vec<String> = (0..solution.cols())
            .map(|c| solution.get(r, c).to_string())
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    let sol_path = root.join(SOLUTION_FILE);
    fs::write(&sol_path, text).map_err(|e| TaskError::io(&sol_path, e))
}

/// A parsed prediction file.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionDocument {
    pub matrix: ScoreMatrix,
    pub source_path: PathBuf,
    pub sequence_index: u64,
}

/// File name for the `k`-th prediction.
pub fn prediction_file_name(sequence_index: u64) -> String {
    format!("{PREDICTION_PREFIX}{sequence_index}{PREDICTION_SUFFIX}")
}

/// Sequence index encoded in a prediction file name, if it follows the convention.
pub fn sequence_index_of(file_name: &str) -> Option<u64> {
    let digits = file_name
        .strip_prefix(PREDICTION_PREFIX)?
        .strip_suffix(PREDICTION_SUFFIX)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Parses prediction text for a `n_test x n_classes` task.
pub fn parse_prediction_text(
    text: &str,
    meta: &TaskMetadata,
    path: &Path,
) -> Result<ScoreMatrix, TaskError> {
    let shape = |message: String| TaskError::BadPredictionShape {
        path: path.to_path_buf(),
        message,
    };
    let body = text.strip_suffix('\n').unwrap_or(text);
    let lines: Vec<&str> = if body.is_empty() {
        Vec::new()
    } else {
        body.split('\n').collect()
    };
    if lines.len() != meta.n_test {
        return Err(shape(format!(
            "expected {} rows, found {}",
            meta.n_test,
            lines.len()
        )));
    }
    let mut values = Vec::with_capacity(meta.n_test * meta.n_classes);
    for (r, line) in lines.iter().enumerate() {
        let row = r + 1;
        let mut count = 0;
        for (c, tok) in line.split(' ').enumerate() {
            let col = c + 1;
            let v: f64 = tok.parse().map_err(|_| TaskError::InvalidNumber {
                path: path.to_path_buf(),
                row,
                col,
                token: tok.to_string(),
            })?;
            if !v.is_finite() {
                return Err(TaskError::NonFiniteScore {
                    path: path.to_path_buf(),
                    row,
                    col,
                    token: tok.to_string(),
                });
            }
            values.push(v);
            count += 1;
        }
        if count != meta.n_classes {
            return Err(shape(format!(
                "row {row}: expected {} columns, found {count}",
                meta.n_classes
            )));
        }
    }
    ScoreMatrix::new(meta.n_test, meta.n_classes, values).map_err(|e| shape(e.to_string()))
}

pub fn parse_predictions(
    path: &Path,
    meta: &TaskMetadata,
) -> Result<PredictionDocument, TaskError> {
    let text = read_utf8(path)?;
    let matrix = parse_prediction_text(&text, meta, path)?;
    let sequence_index = path
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(sequence_index_of)
        .unwrap_or(0);
    Ok(PredictionDocument {
        matrix,
        source_path: path.to_path_buf(),
        sequence_index,
    })
}

/// Renders a matrix in the prediction format. Values use the shortest
/// decimal representation that round-trips.
pub fn render_predictions(matrix: &ScoreMatrix) -> String {
    let mut out = String::with_capacity(matrix.rows() * matrix.cols() * 8);
    for r in 0..matrix.rows() {
        for (c, v) in matrix.row(r).iter().enumerate() {
            if c > 0 {
                out.push(' ');
            }
            // `{}` never emits NaN/inf here since matrices are finite.
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

/// Writes `contents` to `dir/name` through a hidden temp file and a rename,
/// so readers see either nothing or the complete file.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, TaskError> {
    let tmp = dir.join(format!(".{name}.tmp"));
    let dest = dir.join(name);
    let write = || -> io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, &dest)
    };
    write().map_err(|e| TaskError::Io {
        path: dest.clone(),
        source: e,
    })?;
    Ok(dest)
}

pub fn write_predictions(
    matrix: &ScoreMatrix,
    dir: &Path,
    sequence_index: u64,
) -> Result<PathBuf, TaskError> {
    write_atomic(
        dir,
        &prediction_file_name(sequence_index),
        render_predictions(matrix).as_bytes(),
    )
}
