//! Scoring primitives: per-class ROC-AUC, NAUC, the logarithmic time
//! transform and the area under a learning curve (ALC).
//!
//! A learning curve is a right-continuous step function over `[0, T]`. It is
//! zero before the first prediction and holds the score of the latest
//! prediction afterwards, up to the budget `T`. Because the curve is piecewise
//! constant, its integral under the transformed time measure is computed in
//! closed form, one step at a time.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default time budget in seconds.
pub const DEFAULT_BUDGET: f64 = 1200.0;
/// Default time-transform parameter in seconds.
pub const DEFAULT_T0: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("invalid scoring parameters: budget={budget}, t0={t0} (both must be finite and > 0)")]
    InvalidParams { budget: f64, t0: f64 },
    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("degenerate class: labels contain only one value")]
    DegenerateClass,
    #[error("non-finite score at row {row}, column {col}")]
    NonFiniteScore { row: usize, col: usize },
    #[error("label at row {row}, column {col} is not 0 or 1")]
    InvalidLabel { row: usize, col: usize },
    #[error("empty matrix: at least one row and one column required")]
    EmptyMatrix,
    #[error("time {t} outside the budget range [0, {budget}]")]
    OutOfBudgetRange { t: f64, budget: f64 },
    #[error("invalid curve point ({timestamp}, {score})")]
    InvalidPoint { timestamp: f64, score: f64 },
    #[error("curve timestamps must be strictly increasing (index {index})")]
    UnorderedCurve { index: usize },
    #[error("prediction event {index}: {source}")]
    Event {
        index: usize,
        #[source]
        source: Box<MetricsError>,
    },
}

/// Budget `T` and transform parameter `t0`, both in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringParams {
    budget: f64,
    t0: f64,
}

impl ScoringParams {
    pub fn new(budget: f64, t0: f64) -> Result<Self, MetricsError> {
        if !(budget.is_finite() && budget > 0.0 && t0.is_finite() && t0 > 0.0) {
            return Err(MetricsError::InvalidParams { budget, t0 });
        }
        Ok(Self { budget, t0 })
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Same budget, different `t0`.
    pub fn with_t0(&self, t0: f64) -> Result<Self, MetricsError> {
        Self::new(self.budget, t0)
    }
}

impl Default for ScoringParams {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            t0: DEFAULT_T0,
        }
    }
}

/// Binary ground truth, `n_examples x n_classes`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    rows: usize,
    cols: usize,
    values: Vec<u8>,
}

impl LabelMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<u8>) -> Result<Self, MetricsError> {
        if rows == 0 || cols == 0 {
            return Err(MetricsError::EmptyMatrix);
        }
        if values.len() != rows * cols {
            return Err(MetricsError::ShapeMismatch {
                expected_rows: rows,
                expected_cols: cols,
                rows: values.len() / cols,
                cols,
            });
        }
        if let Some(i) = values.iter().position(|&v| v > 1) {
            return Err(MetricsError::InvalidLabel {
                row: i / cols,
                col: i % cols,
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, MetricsError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(MetricsError::ShapeMismatch {
                expected_rows: rows.len(),
                expected_cols: cols,
                rows: rows.len(),
                cols: bad.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.values[row * self.cols + col]
    }

    pub fn column(&self, col: usize) -> Vec<u8> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }
}

/// Real-valued solver output, `n_examples x n_classes`, row-major, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, MetricsError> {
        if rows == 0 || cols == 0 {
            return Err(MetricsError::EmptyMatrix);
        }
        if values.len() != rows * cols {
            return Err(MetricsError::ShapeMismatch {
                expected_rows: rows,
                expected_cols: cols,
                rows: values.len() / cols,
                cols,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MetricsError::NonFiniteScore {
                row: i / cols,
                col: i % cols,
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MetricsError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(MetricsError::ShapeMismatch {
                expected_rows: rows.len(),
                expected_cols: cols,
                rows: rows.len(),
                cols: bad.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Every entry set to `value`.
    pub fn constant(rows: usize, cols: usize, value: f64) -> Result<Self, MetricsError> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl From<&LabelMatrix> for ScoreMatrix {
    fn from(labels: &LabelMatrix) -> Self {
        Self {
            rows: labels.rows,
            cols: labels.cols,
            values: labels.values.iter().map(|&v| f64::from(v)).collect(),
        }
    }
}

/// One sample of the learning curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub timestamp: f64,
    pub score: f64,
}

/// Right-continuous step function `s(t)` over `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    points: Vec<CurvePoint>,
    params: ScoringParams,
}

impl LearningCurve {
    pub fn new(points: Vec<CurvePoint>, params: ScoringParams) -> Result<Self, MetricsError> {
        for (i, p) in points.iter().enumerate() {
            let ok_time =
                p.timestamp.is_finite() && p.timestamp >= 0.0 && p.timestamp <= params.budget;
            let ok_score = p.score.is_finite() && (-1.0..=1.0).contains(&p.score);
            if !(ok_time && ok_score) {
                return Err(MetricsError::InvalidPoint {
                    timestamp: p.timestamp,
                    score: p.score,
                });
            }
            if i > 0 && points[i - 1].timestamp >= p.timestamp {
                return Err(MetricsError::UnorderedCurve { index: i });
            }
        }
        Ok(Self { points, params })
    }

    pub fn empty(params: ScoringParams) -> Self {
        Self {
            points: Vec::new(),
            params,
        }
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn params(&self) -> ScoringParams {
        self.params
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The curve value at time `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        match self.points.partition_point(|p| p.timestamp <= t) {
            0 => 0.0,
            n => self.points[n - 1].score,
        }
    }

    /// Score of the last point, or 0 for an empty curve.
    pub fn final_score(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.score)
    }

    /// The same points re-scored under other parameters. Points beyond the
    /// new budget are dropped.
    pub fn rescaled(&self, params: ScoringParams) -> Self {
        Self {
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| p.timestamp <= params.budget)
                .collect(),
            params,
        }
    }
}

fn check_finite(values: &[f64]) -> Result<(), MetricsError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(row) => Err(MetricsError::NonFiniteScore { row, col: 0 }),
        None => Ok(()),
    }
}

/// ROC-AUC of one binary problem as the Mann-Whitney statistic: the fraction
/// of (positive, negative) pairs ranked correctly, ties counting one half.
pub fn auc_binary(scores: &[f64], labels: &[u8]) -> Result<f64, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::ShapeMismatch {
            expected_rows: labels.len(),
            expected_cols: 1,
            rows: scores.len(),
            cols: 1,
        });
    }
    check_finite(scores)?;
    let n_pos = labels.iter().filter(|&&l| l != 0).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::DegenerateClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Twice the U statistic, kept integral so the result is exact.
    let mut twice_u: u64 = 0;
    let mut neg_below: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u64, 0u64);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] != 0 {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        twice_u += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    Ok(twice_u as f64 / (2 * n_pos * n_neg) as f64)
}

/// Normalized AUC (`2 * AUC - 1`) averaged over the classes that have both
/// positive and negative examples. Returns 0 when every class is degenerate.
pub fn nauc(scores: &ScoreMatrix, labels: &LabelMatrix) -> Result<f64, MetricsError> {
    if scores.rows != labels.rows || scores.cols != labels.cols {
        return Err(MetricsError::ShapeMismatch {
            expected_rows: labels.rows,
            expected_cols: labels.cols,
            rows: scores.rows,
            cols: scores.cols,
        });
    }
    let mut total = 0.0;
    let mut counted = 0usize;
    for col in 0..labels.cols {
        match auc_binary(&scores.column(col), &labels.column(col)) {
            Ok(auc) => {
                total += 2.0 * auc - 1.0;
                counted += 1;
            }
            Err(MetricsError::DegenerateClass) => {}
            Err(MetricsError::NonFiniteScore { row, .. }) => {
                return Err(MetricsError::NonFiniteScore { row, col })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(if counted == 0 {
        0.0
    } else {
        total / counted as f64
    })
}

/// Logarithmic time transform `log(1 + t/t0) / log(1 + T/t0)`, mapping
/// `[0, T]` onto `[0, 1]`.
pub fn time_transform(t: f64, params: &ScoringParams) -> Result<f64, MetricsError> {
    if !(t >= 0.0 && t <= params.budget) {
        return Err(MetricsError::OutOfBudgetRange {
            t,
            budget: params.budget,
        });
    }
    Ok(transform_unchecked(t, params))
}

fn transform_unchecked(t: f64, params: &ScoringParams) -> f64 {
    (t / params.t0).ln_1p() / (params.budget / params.t0).ln_1p()
}

/// Area under the learning curve with respect to the transformed time.
///
/// Each step contributes its score times the transformed length of the
/// interval it holds; the last step extends to the budget.
pub fn alc(curve: &LearningCurve) -> f64 {
    let params = &curve.params;
    let mut area = 0.0;
    for (i, p) in curve.points.iter().enumerate() {
        let end = curve
            .points
            .get(i + 1)
            .map_or(params.budget, |next| next.timestamp);
        area +=
            p.score * (transform_unchecked(end, params) - transform_unchecked(p.timestamp, params));
    }
    area
}

/// Builds a learning curve from timestamped predictions.
///
/// Events are sorted by time; those beyond the budget are dropped and, for
/// equal timestamps, the event that appears last in `events` wins.
pub fn curve_from_events(
    events: &[(f64, &ScoreMatrix)],
    labels: &LabelMatrix,
    params: ScoringParams,
) -> Result<LearningCurve, MetricsError> {
    let mut kept: Vec<(usize, f64)> = Vec::with_capacity(events.len());
    for (index, &(t, _)) in events.iter().enumerate() {
        if !(t.is_finite() && t >= 0.0) {
            return Err(MetricsError::Event {
                index,
                source: Box::new(MetricsError::OutOfBudgetRange {
                    t,
                    budget: params.budget,
                }),
            });
        }
        if t <= params.budget {
            kept.push((index, t));
        }
    }
    // Stable sort keeps input order among equal timestamps.
    kept.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut points: Vec<CurvePoint> = Vec::with_capacity(kept.len());
    let mut iter = kept.iter().peekable();
    while let Some(&(index, t)) = iter.next() {
        if iter.peek().is_some_and(|next| next.1 == t) {
            continue;
        }
        let score = nauc(events[index].1, labels).map_err(|e| MetricsError::Event {
            index,
            source: Box::new(e),
        })?;
        points.push(CurvePoint {
            timestamp: t,
            score,
        });
    }
    LearningCurve::new(points, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[(f64, f64)], p: ScoringParams) -> LearningCurve {
        LearningCurve::new(
            points
                .iter()
                .map(|&(timestamp, score)| CurvePoint { timestamp, score })
                .collect(),
            p,
        )
        .unwrap()
    }

    fn pair_count_auc(scores: &[f64], labels: &[u8]) -> f64 {
        let (mut twice, mut np, mut nn) = (0u64, 0u64, 0u64);
        for (i, &li) in labels.iter().enumerate() {
            if li == 1 {
                np += 1;
            } else {
                nn += 1;
            }
            for (j, &lj) in labels.iter().enumerate() {
                if li == 1 && lj == 0 {
                    if scores[i] > scores[j] {
                        twice += 2;
                    } else if scores[i] == scores[j] {
                        twice += 1;
                    }
                }
            }
        }
        twice as f64 / (2 * np * nn) as f64
    }

    #[test]
    fn params_reject_non_positive() {
        assert!(ScoringParams::new(0.0, 60.0).is_err());
        assert!(ScoringParams::new(1200.0, -1.0).is_err());
        assert!(ScoringParams::new(f64::NAN, 1.0).is_err());
        let d = ScoringParams::default();
        assert_eq!((d.budget(), d.t0()), (1200.0, 60.0));
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc_binary(&[0.9, 0.8, 0.1], &[1, 1, 0]).unwrap(), 1.0);
        assert_eq!(auc_binary(&[0.5, 0.5], &[1, 0]).unwrap(), 0.5);
        assert_eq!(auc_binary(&[0.1, 0.9], &[1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn auc_errors() {
        assert_eq!(
            auc_binary(&[0.1, 0.2], &[1, 1]),
            Err(MetricsError::DegenerateClass)
        );
        assert_eq!(
            auc_binary(&[0.1, 0.2], &[0, 0]),
            Err(MetricsError::DegenerateClass)
        );
        assert!(matches!(
            auc_binary(&[0.1], &[1, 0]),
            Err(MetricsError::ShapeMismatch { .. })
        ));
        assert_eq!(
            auc_binary(&[0.1, f64::NAN], &[1, 0]),
            Err(MetricsError::NonFiniteScore { row: 1, col: 0 })
        );
    }

    #[test]
    fn auc_matches_pair_count_on_random_instance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
        let scores: Vec<f64> = (0..20)
            .map(|_| f64::from(rng.gen_range(0..6u8)) / 5.0)
            .collect();
        let mut labels: Vec<u8> = (0..20).map(|_| rng.gen_range(0..2)).collect();
        labels[0] = 0;
        labels[1] = 1;
        assert_eq!(
            auc_binary(&scores, &labels).unwrap(),
            pair_count_auc(&scores, &labels)
        );
    }

    #[test]
    fn nauc_examples() {
        let labels =
            LabelMatrix::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 1], vec![0, 0]]).unwrap();
        let perfect = ScoreMatrix::from(&labels);
        assert_eq!(nauc(&perfect, &labels).unwrap(), 1.0);
        let inverted =
            ScoreMatrix::new(4, 2, perfect.values().iter().map(|v| 1.0 - v).collect()).unwrap();
        assert_eq!(nauc(&inverted, &labels).unwrap(), -1.0);
    }

    #[test]
    fn nauc_skips_degenerate_class() {
        // Class 0: positives score 0.8 and 0.3, negatives 0.5 and 0.1.
        // Pairs (pos > neg): 0.8>0.5, 0.8>0.1, 0.3>0.1, 0.3<0.5 -> 3/4.
        // Class 1 is all-positive and excluded, so NAUC = 2 * 0.75 - 1.
        let labels =
            LabelMatrix::from_rows(&[vec![1, 1], vec![1, 1], vec![0, 1], vec![0, 1]]).unwrap();
        let scores = ScoreMatrix::from_rows(&[
            vec![0.8, 0.2],
            vec![0.3, 0.9],
            vec![0.5, 0.4],
            vec![0.1, 0.6],
        ])
        .unwrap();
        assert_eq!(nauc(&scores, &labels).unwrap(), 0.5);
    }

    #[test]
    fn nauc_all_degenerate_is_zero() {
        let labels = LabelMatrix::from_rows(&[vec![1, 0], vec![1, 0]]).unwrap();
        let scores = ScoreMatrix::from_rows(&[vec![0.3, 0.2], vec![0.1, 0.9]]).unwrap();
        assert_eq!(nauc(&scores, &labels).unwrap(), 0.0);
    }

    #[test]
    fn nauc_shape_mismatch() {
        let labels = LabelMatrix::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        let scores = ScoreMatrix::from_rows(&[vec![0.3], vec![0.1]]).unwrap();
        assert!(matches!(
            nauc(&scores, &labels),
            Err(MetricsError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn matrices_reject_bad_entries() {
        assert_eq!(
            ScoreMatrix::new(1, 2, vec![0.1, f64::INFINITY]),
            Err(MetricsError::NonFiniteScore { row: 0, col: 1 })
        );
        assert_eq!(
            LabelMatrix::new(2, 1, vec![0, 2]),
            Err(MetricsError::InvalidLabel { row: 1, col: 0 })
        );
        assert_eq!(
            ScoreMatrix::new(0, 2, vec![]),
            Err(MetricsError::EmptyMatrix)
        );
    }

    #[test]
    fn time_transform_examples() {
        let p = ScoringParams::default();
        assert_eq!(time_transform(0.0, &p).unwrap(), 0.0);
        assert_eq!(time_transform(1200.0, &p).unwrap(), 1.0);
        // ln(2) / ln(21)
        let expected = 0.693_147_180_559_945_3 / 3.044_522_437_723_423;
        assert!((time_transform(60.0, &p).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.227_670).abs() < 5e-7);
        assert!(time_transform(-1.0, &p).is_err());
        assert!(time_transform(1200.5, &p).is_err());
    }

    #[test]
    fn alc_examples() {
        let p = ScoringParams::default();
        assert_eq!(alc(&curve(&[(0.0, 0.7)], p)), 0.7);
        assert_eq!(alc(&LearningCurve::empty(p)), 0.0);
        let two = curve(&[(10.0, 0.5), (100.0, 0.8)], p);
        let t10 = time_transform(10.0, &p).unwrap();
        let t100 = time_transform(100.0, &p).unwrap();
        let expected = 0.5 * (t100 - t10) + 0.8 * (1.0 - t100);
        assert!((alc(&two) - expected).abs() < 1e-15);
        // Frozen from 30-digit quadrature of s(t)/(t+t0) over [0, T].
        assert!((alc(&two) - 0.678_035_349_250_108).abs() < 1e-8);
    }

    #[test]
    fn curve_rejects_bad_points() {
        let p = ScoringParams::default();
        assert!(LearningCurve::new(
            vec![CurvePoint {
                timestamp: 5.0,
                score: 1.5
            }],
            p
        )
        .is_err());
        assert!(LearningCurve::new(
            vec![CurvePoint {
                timestamp: 1300.0,
                score: 0.5
            }],
            p
        )
        .is_err());
        assert!(LearningCurve::new(
            vec![
                CurvePoint {
                    timestamp: 5.0,
                    score: 0.5
                },
                CurvePoint {
                    timestamp: 5.0,
                    score: 0.6
                }
            ],
            p
        )
        .is_err());
    }

    #[test]
    fn value_at_is_right_continuous() {
        let c = curve(&[(10.0, 0.5), (100.0, 0.8)], ScoringParams::default());
        assert_eq!(c.value_at(0.0), 0.0);
        assert_eq!(c.value_at(9.999), 0.0);
        assert_eq!(c.value_at(10.0), 0.5);
        assert_eq!(c.value_at(99.0), 0.5);
        assert_eq!(c.value_at(100.0), 0.8);
        assert_eq!(c.value_at(1200.0), 0.8);
    }

    #[test]
    fn events_to_curve() {
        let labels = LabelMatrix::from_rows(&[vec![1], vec![0], vec![1], vec![0]]).unwrap();
        let good = ScoreMatrix::from_rows(&[vec![0.9], vec![0.1], vec![0.8], vec![0.2]]).unwrap();
        let half = ScoreMatrix::from_rows(&[vec![0.9], vec![0.8], vec![0.1], vec![0.2]]).unwrap();
        let bad = ScoreMatrix::from_rows(&[vec![0.1], vec![0.9], vec![0.2], vec![0.8]]).unwrap();
        let p = ScoringParams::default();

        let none = curve_from_events(&[], &labels, p).unwrap();
        assert!(none.is_empty());
        assert_eq!(alc(&none), 0.0);

        let late = curve_from_events(&[(1300.0, &good)], &labels, p).unwrap();
        assert!(late.is_empty());

        // Unsorted input, duplicate at t=50: the later `bad` wins over `half`.
        let events = [(50.0, &half), (20.0, &good), (50.0, &bad)];
        let c = curve_from_events(&events, &labels, p).unwrap();
        let manual = curve(&[(20.0, 1.0), (50.0, -1.0)], p);
        assert_eq!(c, manual);
    }

    #[test]
    fn events_error_names_index() {
        let labels = LabelMatrix::from_rows(&[vec![1], vec![0]]).unwrap();
        let ok = ScoreMatrix::from_rows(&[vec![0.9], vec![0.1]]).unwrap();
        let wrong = ScoreMatrix::from_rows(&[vec![0.9, 0.1], vec![0.1, 0.2]]).unwrap();
        let err = curve_from_events(
            &[(1.0, &ok), (2.0, &wrong)],
            &labels,
            ScoringParams::default(),
        )
        .unwrap_err();
        assert!(matches!(err, MetricsError::Event { index: 1, .. }));
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn arb_curve(budget: f64) -> impl Strategy<Value = Vec<CurvePoint>> {
        prop::collection::btree_map(0u32..1_000_000, -1.0f64..=1.0, 0..20).prop_map(move |m| {
            m.into_iter()
                .map(|(k, score)| CurvePoint {
                    timestamp: budget * f64::from(k) / 1_000_000.0,
                    score,
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn constant_curve_scores_its_value(c in -1.0f64..=1.0, budget in 1.0f64..10_000.0, t0 in 0.01f64..1000.0) {
            let p = ScoringParams::new(budget, t0).unwrap();
            let curve = LearningCurve::new(vec![CurvePoint { timestamp: 0.0, score: c }], p).unwrap();
            prop_assert!((alc(&curve) - c).abs() <= 1e-12);
        }

        #[test]
        fn redundant_point_leaves_alc_unchanged(points in arb_curve(1200.0), at in 0.0f64..1.0) {
            let p = ScoringParams::default();
            let curve = LearningCurve::new(points.clone(), p).unwrap();
            prop_assume!(!points.is_empty());
            let t = 1200.0 * at;
            prop_assume!(t > points[0].timestamp && points.iter().all(|q| q.timestamp != t));
            let mut extended = points.clone();
            let score = curve.value_at(t);
            extended.push(CurvePoint { timestamp: t, score });
            extended.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
            let extended = LearningCurve::new(extended, p).unwrap();
            prop_assert!((alc(&curve) - alc(&extended)).abs() <= 1e-12);
        }

        #[test]
        fn pointwise_dominance_orders_alc(points in arb_curve(1200.0), bump in 0.0f64..0.5) {
            let p = ScoringParams::default();
            let lower = LearningCurve::new(points.clone(), p).unwrap();
            let raised: Vec<CurvePoint> = points
                .iter()
                .map(|q| CurvePoint { timestamp: q.timestamp, score: (q.score + bump).min(1.0) })
                .collect();
            let upper = LearningCurve::new(raised, p).unwrap();
            prop_assert!(alc(&upper) >= alc(&lower) - 1e-15);
        }

        #[test]
        fn time_transform_is_monotone_and_scale_free(a in 0.0f64..1.0, b in 0.0f64..1.0, k in 0.001f64..1000.0,
                                                     budget in 1.0f64..10_000.0, t0 in 0.01f64..1000.0) {
            let p = ScoringParams::new(budget, t0).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            let tl = time_transform(lo * budget, &p).unwrap();
            let th = time_transform(hi * budget, &p).unwrap();
            prop_assert!(tl < th);
            let scaled = ScoringParams::new(k * budget, k * t0).unwrap();
            let t = a * budget;
            let direct = time_transform(t, &p).unwrap();
            let rescaled = time_transform((k * t).min(k * budget), &scaled).unwrap();
            prop_assert!((direct - rescaled).abs() <= 1e-12);
        }

        #[test]
        fn auc_is_in_unit_interval(pairs in prop::collection::vec((0u8..5, 0u8..2), 2..60)) {
            let scores: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
            let labels: Vec<u8> = pairs.iter().map(|p| p.1).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let auc = auc_binary(&scores, &labels).unwrap();
            prop_assert!((0.0..=1.0).contains(&auc));
        }
    }
}
