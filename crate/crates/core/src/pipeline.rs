//! End-to-end clustering: neighbor graph, spanning forest, edge-length
//! density, division, agglomeration, and the outlier policy.

use crate::density::{
    derive_thresholds, estimate_density, locate_extrema, DensityCurve, KernelKind,
    DEFAULT_GRID_SIZE, MIN_GRID_SIZE,
};
use crate::error::{DecwaError, Result};
use crate::evaluation::{outlier_ratio, OUTLIER};
use crate::graph::{minimum_spanning_forest, NeighborTable, SpanningForest};
use crate::metrics::{check_dataset, MetricKind, Point};
use crate::partition::{agglomerate, divide, AgglomerationMode, PartitionState};

/// Hyperparameters of one clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecwaParams {
    /// Neighbors per point in the k-NN graph.
    pub k: usize,
    /// KDE bandwidth over forest edge lengths.
    pub bandwidth: f64,
    pub kernel: KernelKind,
    /// Largest linking-edge length that still allows a merge.
    pub lambda: f64,
    /// Largest Wasserstein distance between edge-length sets that still allows a merge.
    pub alpha: f64,
    pub metric: MetricKind,
    pub grid_size: usize,
    /// Final clusters smaller than this are relabelled as outliers.
    pub min_cluster_size: usize,
    pub agglomeration: AgglomerationMode,
    /// Recorded for audit; the pipeline itself draws no random numbers.
    pub seed: u64,
}

impl Default for DecwaParams {
    fn default() -> Self {
        DecwaParams {
            k: 5,
            bandwidth: 0.1,
            kernel: KernelKind::Gaussian,
            lambda: 1.0,
            alpha: 0.1,
            metric: MetricKind::Euclidean,
            grid_size: DEFAULT_GRID_SIZE,
            min_cluster_size: 3,
            agglomeration: AgglomerationMode::SinglePass,
            seed: 0,
        }
    }
}

impl DecwaParams {
    /// Validates everything that does not depend on the dataset size.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(DecwaError::config("k must be at least 1"));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(DecwaError::config(format!(
                "bandwidth must be positive and finite, got {}",
                self.bandwidth
            )));
        }
        if !(self.lambda > 0.0) {
            return Err(DecwaError::config(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.alpha >= 0.0) {
            return Err(DecwaError::config(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        if self.grid_size < MIN_GRID_SIZE {
            return Err(DecwaError::config(format!(
                "grid size must be at least {MIN_GRID_SIZE}, got {}",
                self.grid_size
            )));
        }
        if self.min_cluster_size == 0 {
            return Err(DecwaError::config("min cluster size must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub thresholds: Vec<f64>,
    pub extrema_count: usize,
    pub maxima_count: usize,
    pub subclusters_before_merge: usize,
    pub subclusters_after_merge: usize,
    pub merge_count: usize,
    pub traversals: usize,
    pub forest_components: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    /// Cluster id per point, numbered from 0 by first member; -1 marks outliers.
    pub labels: Vec<i64>,
    pub cluster_count: usize,
    pub outlier_ratio: f64,
    pub diagnostics: Diagnostics,
}

/// Intermediate products of one run, for callers that want more than labels.
#[derive(Debug, Clone)]
pub struct FitTrace {
    pub forest: SpanningForest,
    pub curve: DensityCurve,
    pub divided: PartitionState,
    pub merged: PartitionState,
    pub result: ClusteringResult,
}

/// Clusters `points`.
pub fn fit(points: &[Point], params: &DecwaParams) -> Result<ClusteringResult> {
    fit_traced(points, params).map(|t| t.result)
}

/// Like [`fit`], but also returns the intermediate structures.
pub fn fit_traced(points: &[Point], params: &DecwaParams) -> Result<FitTrace> {
    params.validate()?;
    check_dataset(points)?;
    if points.len() < 2 {
        return Err(DecwaError::pipeline("at least two points are required"));
    }
    let table = NeighborTable::build(points, params.k, params.metric)?;
    fit_with_table(&table, params)
}

/// Runs the pipeline on a precomputed neighbor table. The table's metric
/// overrides `params.metric`.
pub fn fit_with_table(table: &NeighborTable, params: &DecwaParams) -> Result<FitTrace> {
    params.validate()?;
    let graph = table.graph(params.k)?;
    let forest = minimum_spanning_forest(&graph);
    let weights = forest.weights();
    let curve = estimate_density(&weights, params.bandwidth, params.kernel, params.grid_size)?;
    let extrema = locate_extrema(&curve);
    let thresholds = derive_thresholds(&extrema);
    let divided = divide(&forest, &thresholds);
    let (merged, stats) = agglomerate(
        divided.clone(),
        &forest,
        params.lambda,
        params.alpha,
        params.agglomeration,
    )?;
    let (labels, cluster_count) = final_labels(&merged, forest.node_count, params.min_cluster_size);
    let result = ClusteringResult {
        outlier_ratio: outlier_ratio(&labels),
        labels,
        cluster_count,
        diagnostics: Diagnostics {
            thresholds: thresholds.as_slice().to_vec(),
            extrema_count: extrema.len(),
            maxima_count: extrema.maxima(),
            subclusters_before_merge: divided.len(),
            subclusters_after_merge: merged.len(),
            merge_count: stats.merges,
            traversals: stats.traversals,
            forest_components: forest.component_count(),
        },
    };
    Ok(FitTrace {
        forest,
        curve,
        divided,
        merged,
        result,
    })
}

/// Applies the outlier policy and renumbers surviving clusters densely in
/// order of their first member.
pub fn final_labels(
    state: &PartitionState,
    node_count: usize,
    min_cluster_size: usize,
) -> (Vec<i64>, usize) {
    let mut labels = vec![OUTLIER; node_count];
    let mut survivors: Vec<&[usize]> = state
        .subclusters
        .values()
        .filter(|s| s.members.len() >= min_cluster_size)
        .map(|s| s.members.as_slice())
        .collect();
    survivors.sort_unstable_by_key(|m| m[0]);
    for (label, members) in survivors.iter().enumerate() {
        for &m in members.iter() {
            labels[m] = label as i64;
        }
    }
    (labels, survivors.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[&[f64]]) -> Vec<Point> {
        rows.iter()
            .map(|r| Point::new(r.to_vec()).unwrap())
            .collect()
    }

    #[test]
    fn identical_points_form_one_cluster() {
        let points = pts(&[&[1.0, 1.0] as &[f64]; 12]);
        let r = fit(&points, &DecwaParams::default()).unwrap();
        assert_eq!(r.cluster_count, 1);
        assert_eq!(r.outlier_ratio, 0.0);
        assert!(r.labels.iter().all(|&l| l == 0));
        assert!(r.diagnostics.thresholds.is_empty());
    }

    #[test]
    fn validation_errors() {
        let points = pts(&[&[0.0], &[1.0], &[2.0]]);
        let mut p = DecwaParams {
            k: 3,
            ..Default::default()
        };
        assert!(matches!(fit(&points, &p), Err(DecwaError::Config(_))));
        p.k = 0;
        assert!(matches!(fit(&points, &p), Err(DecwaError::Config(_))));
        let p = DecwaParams {
            bandwidth: 0.0,
            ..Default::default()
        };
        assert!(matches!(fit(&points, &p), Err(DecwaError::Config(_))));
        let p = DecwaParams {
            lambda: -1.0,
            ..Default::default()
        };
        assert!(fit(&points, &p).is_err());
        let p = DecwaParams {
            alpha: -1.0,
            ..Default::default()
        };
        assert!(fit(&points, &p).is_err());
        let p = DecwaParams {
            grid_size: 4,
            ..Default::default()
        };
        assert!(fit(&points, &p).is_err());
        assert!(matches!(
            fit(
                &points[..1],
                &DecwaParams {
                    k: 1,
                    ..Default::default()
                }
            ),
            Err(DecwaError::Pipeline(_))
        ));
        assert!(matches!(
            fit(&[], &DecwaParams::default()),
            Err(DecwaError::Data(_))
        ));
    }

    #[test]
    fn labels_renumbered_by_first_member() {
        let mut state = PartitionState {
            assignment: vec![0; 7],
            ..Default::default()
        };
        use crate::partition::SubCluster;
        let mut add = |id: usize, members: Vec<usize>| {
            for &m in &members {
                state.assignment[m] = id;
            }
            state.subclusters.insert(
                id,
                SubCluster {
                    id,
                    members,
                    intra_distances: vec![],
                },
            );
        };
        add(0, vec![3, 4, 5]);
        add(1, vec![0, 1, 6]);
        add(2, vec![2]);
        let (labels, count) = final_labels(&state, 7, 3);
        assert_eq!(labels, vec![0, 0, -1, 1, 1, 1, 0]);
        assert_eq!(count, 2);
        let (labels, count) = final_labels(&state, 7, 1);
        assert_eq!(labels, vec![0, 0, 1, 2, 2, 2, 0]);
        assert_eq!(count, 3);
    }

    #[test]
    fn two_tight_blobs() {
        let mut rows = Vec::new();
        for i in 0..20 {
            let a = i as f64 * 0.3;
            rows.push(vec![
                a.cos() * 0.1 * (1 + i % 3) as f64,
                a.sin() * 0.1 * (1 + i % 4) as f64,
            ]);
        }
        for i in 0..20 {
            let a = i as f64 * 0.7;
            rows.push(vec![
                50.0 + a.cos() * 0.1 * (1 + i % 2) as f64,
                a.sin() * 0.1 * (1 + i % 5) as f64,
            ]);
        }
        let points: Vec<Point> = rows.into_iter().map(|r| Point::new(r).unwrap()).collect();
        let params = DecwaParams {
            k: 4,
            bandwidth: 0.5,
            lambda: 1.0,
            alpha: 1.0,
            ..Default::default()
        };
        let r = fit(&points, &params).unwrap();
        assert_eq!(r.cluster_count, 2);
        assert_eq!(r.outlier_ratio, 0.0);
        assert!(r.labels[..20].iter().all(|&l| l == 0));
        assert!(r.labels[20..].iter().all(|&l| l == 1));
    }
}
