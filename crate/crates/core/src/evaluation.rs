//! Agreement between a clustering and a reference labelling.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{DecwaError, Result};

/// Label given to points that belong to no cluster.
pub const OUTLIER: i64 = -1;

/// How outlier labels enter the pair counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OutlierMode {
    /// All outliers form one ordinary cluster.
    #[default]
    OneCluster,
    /// Each outlier is its own cluster.
    Singletons,
}

impl OutlierMode {
    pub fn name(self) -> &'static str {
        match self {
            OutlierMode::OneCluster => "one-cluster",
            OutlierMode::Singletons => "singletons",
        }
    }
}

impl fmt::Display for OutlierMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OutlierMode {
    type Err = DecwaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "one-cluster" | "one_cluster" => Ok(OutlierMode::OneCluster),
            "singletons" => Ok(OutlierMode::Singletons),
            other => Err(DecwaError::config(format!(
                "unknown outlier mode '{other}'"
            ))),
        }
    }
}

/// Maps labels to dense class indices according to the outlier mode.
fn dense_classes(labels: &[i64], mode: OutlierMode) -> Vec<usize> {
    let mut ids: HashMap<i64, usize> = HashMap::new();
    let mut next = 0usize;
    labels
        .iter()
        .map(|&l| {
            if l == OUTLIER && mode == OutlierMode::Singletons {
                next += 1;
                next - 1
            } else {
                *ids.entry(l).or_insert_with(|| {
                    next += 1;
                    next - 1
                })
            }
        })
        .collect()
}

fn pairs(c: u64) -> i128 {
    let c = c as i128;
    c * (c - 1) / 2
}

/// Hubert-Arabie adjusted Rand index from the contingency table.
///
/// Computed in exact integer arithmetic; the only rounding is the final
/// division. Two identical trivial partitions (one cluster each, or all
/// singletons) score 1.
pub fn adjusted_rand_index(predicted: &[i64], truth: &[i64], mode: OutlierMode) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(DecwaError::config(format!(
            "label vectors differ in length: {} vs {}",
            predicted.len(),
            truth.len()
        )));
    }
    let n = predicted.len();
    if n < 2 {
        return Err(DecwaError::config(
            "adjusted Rand index needs at least two points",
        ));
    }
    let p = dense_classes(predicted, mode);
    let t = dense_classes(truth, mode);
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&a, &b) in p.iter().zip(&t) {
        *table.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    let index: i128 = table.values().map(|&c| pairs(c)).sum();
    let sum_rows: i128 = rows.values().map(|&c| pairs(c)).sum();
    let sum_cols: i128 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(n as u64);
    let numerator = 2 * (index * total - sum_rows * sum_cols);
    let denominator = (sum_rows + sum_cols) * total - 2 * sum_rows * sum_cols;
    if denominator == 0 {
        return Ok(1.0);
    }
    Ok(numerator as f64 / denominator as f64)
}

/// Fraction of labels equal to [`OUTLIER`]; 0 for an empty vector.
pub fn outlier_ratio(labels: &[i64]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    labels.iter().filter(|&&l| l == OUTLIER).count() as f64 / labels.len() as f64
}
