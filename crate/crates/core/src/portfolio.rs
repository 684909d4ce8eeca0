//! Portfolio construction over a configurations x datasets ALC matrix, and
//! per-task configuration selection from dataset meta-features.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PortfolioError {
    #[error("performance matrix: {0}")]
    InvalidMatrix(String),
    #[error("portfolio size {k} outside 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("portfolio is empty")]
    EmptyPortfolio,
    #[error("unknown configuration `{0}`")]
    UnknownConfig(String),
    #[error("dataset `{0}` has no meta-features or no matrix column")]
    MissingFeatures(String),
    #[error("meta-features must be positive: {0}")]
    InvalidFeatures(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMatrix {
    configs: Vec<String>,
    datasets: Vec<String>,
    alc: Vec<Vec<f64>>,
}

impl PerformanceMatrix {
    pub fn new(
        configs: Vec<String>,
        datasets: Vec<String>,
        alc: Vec<Vec<f64>>,
    ) -> Result<Self, PortfolioError> {
        let invalid = |m: String| Err(PortfolioError::InvalidMatrix(m));
        if configs.is_empty() || datasets.is_empty() {
            return invalid("needs at least one configuration and one dataset".into());
        }
        if alc.len() != configs.len() {
            return invalid(format!(
                "{} rows for {} configurations",
                alc.len(),
                configs.len()
            ));
        }
        for (c, row) in configs.iter().zip(&alc) {
            if row.len() != datasets.len() {
                return invalid(format!(
                    "row `{c}` has {} entries, expected {}",
                    row.len(),
                    datasets.len()
                ));
            }
            if let Some(v) = row
                .iter()
                .find(|v| !(v.is_finite() && (-1.0..=1.0).contains(*v)))
            {
                return invalid(format!("row `{c}` has ALC {v} outside [-1, 1]"));
            }
        }
        for ids in [&configs, &datasets] {
            let mut sorted: Vec<&String> = ids.iter().collect();
            sorted.sort();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return invalid(format!("duplicate id `{}`", w[0]));
            }
        }
        Ok(Self {
            configs,
            datasets,
            alc,
        })
    }

    pub fn configs(&self) -> &[String] {
        &self.configs
    }

    pub fn datasets(&self) -> &[String] {
        &self.datasets
    }

    pub fn get(&self, config: usize, dataset: usize) -> f64 {
        self.alc[config][dataset]
    }

    pub fn config_index(&self, id: &str) -> Option<usize> {
        self.configs.iter().position(|c| c == id)
    }

    pub fn dataset_index(&self, id: &str) -> Option<usize> {
        self.datasets.iter().position(|d| d == id)
    }

    /// Mean over datasets of the best ALC among `subset`; -1 (the ALC lower
    /// bound) for the empty set.
    pub fn coverage(&self, subset: &[usize]) -> f64 {
        if subset.is_empty() {
            return -1.0;
        }
        let total: f64 = (0..self.datasets.len())
            .map(|d| {
                subset
                    .iter()
                    .map(|&c| self.alc[c][d])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum();
        total / self.datasets.len() as f64
    }
}

/// Greedy selection result, in pick order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    pub configs: Vec<String>,
    pub indices: Vec<usize>,
    /// Coverage after each pick.
    pub coverage: Vec<f64>,
}

/// Builds a `k`-configuration portfolio by repeatedly adding the
/// configuration with the largest coverage gain; ties go to the earlier
/// configuration.
pub fn greedy_portfolio(matrix: &PerformanceMatrix, k: usize) -> Result<Portfolio, PortfolioError> {
    let n = matrix.configs.len();
    if k == 0 || k > n {
        return Err(PortfolioError::BadK { k, n });
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut coverage = Vec::with_capacity(k);
    // best[d] = max ALC on dataset d among chosen configurations
    let mut best = vec![f64::NEG_INFINITY; matrix.datasets.len()];
    for _ in 0..k {
        let mut pick: Option<(usize, f64)> = None;
        for c in (0..n).filter(|c| !chosen.contains(c)) {
            let value: f64 = best
                .iter()
                .zip(&matrix.alc[c])
                .map(|(b, v)| b.max(*v))
                .sum();
            if pick.is_none_or(|(_, v)| value > v) {
                pick = Some((c, value));
            }
        }
        let (c, _) = pick.expect("k <= n leaves a candidate");
        for (b, v) in best.iter_mut().zip(&matrix.alc[c]) {
            *b = b.max(*v);
        }
        chosen.push(c);
        coverage.push(matrix.coverage(&chosen));
    }
    Ok(Portfolio {
        configs: chosen.iter().map(|&c| matrix.configs[c].clone()).collect(),
        indices: chosen,
        coverage,
    })
}

/// The configuration with the best mean ALC across datasets; ties go to the
/// earlier configuration.
pub fn generalist_config(matrix: &PerformanceMatrix) -> String {
    let mut best = (0, f64::NEG_INFINITY);
    for (c, row) in matrix.alc.iter().enumerate() {
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        if mean > best.1 {
            best = (c, mean);
        }
    }
    matrix.configs[best.0].clone()
}

/// Dataset descriptors used to find similar tasks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatures {
    pub resolution: (u64, u64),
    pub n_classes: u64,
    pub n_train: u64,
    pub n_test: u64,
    /// Number of frames; 1 for still images.
    pub sequence_length: u64,
}

impl MetaFeatures {
    pub fn validate(&self) -> Result<(), PortfolioError> {
        let all = [
            self.resolution.0,
            self.resolution.1,
            self.n_classes,
            self.n_train,
            self.n_test,
            self.sequence_length,
        ];
        if all.contains(&0) {
            return Err(PortfolioError::InvalidFeatures(format!("{self:?}")));
        }
        Ok(())
    }

    /// Log-transformed feature vector: pixels, classes, train, test, frames.
    pub fn log_vector(&self) -> [f64; 5] {
        [
            ((self.resolution.0 * self.resolution.1) as f64).ln(),
            (self.n_classes as f64).ln(),
            (self.n_train as f64).ln(),
            (self.n_test as f64).ln(),
            (self.sequence_length as f64).ln(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub config: String,
    pub nearest_dataset: String,
    pub distance: f64,
}

/// Picks a portfolio configuration for `query`: finds the training dataset
/// nearest in z-scored log meta-feature space (ties by dataset id) and
/// returns the portfolio member with the highest ALC on it (ties by matrix
/// order).
pub fn select_config(
    portfolio: &[String],
    matrix: &PerformanceMatrix,
    train_features: &BTreeMap<String, MetaFeatures>,
    query: &MetaFeatures,
) -> Result<Selection, PortfolioError> {
    if portfolio.is_empty() {
        return Err(PortfolioError::EmptyPortfolio);
    }
    let members = portfolio
        .iter()
        .map(|c| {
            matrix
                .config_index(c)
                .ok_or_else(|| PortfolioError::UnknownConfig(c.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if train_features.is_empty() {
        return Err(PortfolioError::MissingFeatures(
            "<no training datasets>".into(),
        ));
    }
    query.validate()?;
    let mut train = Vec::with_capacity(train_features.len());
    for (id, f) in train_features {
        f.validate()?;
        let d = matrix
            .dataset_index(id)
            .ok_or_else(|| PortfolioError::MissingFeatures(id.clone()))?;
        train.push((id, d, f.log_vector()));
    }

    let n = train.len() as f64;
    let mut mean = [0.0; 5];
    let mut scale = [1.0; 5];
    for i in 0..5 {
        mean[i] = train.iter().map(|t| t.2[i]).sum::<f64>() / n;
        let var = train
            .iter()
            .map(|t| (t.2[i] - mean[i]).powi(2))
            .sum::<f64>()
            / n;
        if var > 0.0 {
            scale[i] = var.sqrt();
        }
    }
    let z = |v: [f64; 5]| -> [f64; 5] { std::array::from_fn(|i| (v[i] - mean[i]) / scale[i]) };
    let q = z(query.log_vector());

    // BTreeMap iteration is by id, so the first minimum wins ties by id.
    let mut nearest: Option<(&String, usize, f64)> = None;
    for (id, d, v) in &train {
        let zv = z(*v);
        let dist = zv
            .iter()
            .zip(&q)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if nearest.is_none_or(|(_, _, best)| dist < best) {
            nearest = Some((id, *d, dist));
        }
    }
    let (dataset, d, distance) = nearest.expect("non-empty training set");

    let mut best = members[0];
    for &c in &members {
        let (v, b) = (matrix.alc[c][d], matrix.alc[best][d]);
        if v > b || (v == b && c < best) {
            best = c;
        }
    }
    Ok(Selection {
        config: matrix.configs[best].clone(),
        nearest_dataset: dataset.clone(),
        distance,
    })
}
