//! k-nearest-neighbor graph construction and its reduction to a minimum
//! spanning forest with Kruskal's algorithm.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{DecwaError, Result};
use crate::metrics::{check_dataset, MetricKind, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl WeightedEdge {
    /// Builds an edge with endpoints stored as `(min, max)`.
    pub fn new(a: usize, b: usize, w: f64) -> Self {
        WeightedEdge {
            u: a.min(b),
            v: a.max(b),
            w,
        }
    }

    /// Orders by weight, then by the normalized endpoint pair.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.w
            .total_cmp(&other.w)
            .then_with(|| self.u.min(self.v).cmp(&other.u.min(other.v)))
            .then_with(|| self.u.max(self.v).cmp(&other.u.max(other.v)))
    }
}

/// Per-node neighbor lists sorted by `(distance, index)`.
///
/// Rows are truncated at `max_k`, so a graph for any `k <= max_k` is obtained
/// by taking a prefix of every row. The tuner builds this once per dataset.
#[derive(Debug, Clone)]
pub struct NeighborTable {
    rows: Vec<Vec<(usize, f64)>>,
    max_k: usize,
    metric: MetricKind,
}

impl NeighborTable {
    pub fn build(points: &[Point], max_k: usize, metric: MetricKind) -> Result<Self> {
        check_dataset(points)?;
        let n = points.len();
        if n < 2 {
            return Err(DecwaError::pipeline(
                "at least two points are required to build a neighbor graph",
            ));
        }
        check_k(max_k, n)?;
        let rows = (0..n)
            .into_par_iter()
            .map(|i| {
                let p = points[i].features();
                let mut row: Vec<(usize, f64)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (j, metric.eval(p, points[j].features())))
                    .collect();
                let by_dist =
                    |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
                if max_k < row.len() {
                    row.select_nth_unstable_by(max_k - 1, by_dist);
                    row.truncate(max_k);
                }
                row.sort_unstable_by(by_dist);
                row
            })
            .collect();
        Ok(NeighborTable {
            rows,
            max_k,
            metric,
        })
    }

    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    /// The k nearest neighbors of `node`, nearest first.
    pub fn neighbors(&self, node: usize, k: usize) -> &[(usize, f64)] {
        &self.rows[node][..k.min(self.rows[node].len())]
    }

    /// Union-symmetrized k-NN graph.
    pub fn graph(&self, k: usize) -> Result<NeighborGraph> {
        check_k(k, self.node_count())?;
        if k > self.max_k {
            return Err(DecwaError::config(format!(
                "k = {k} exceeds the neighbor table's capacity {}",
                self.max_k
            )));
        }
        let mut edges: Vec<WeightedEdge> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(u, row)| {
                row[..k]
                    .iter()
                    .map(move |&(v, w)| WeightedEdge::new(u, v, w))
            })
            .collect();
        edges.sort_unstable_by_key(|e| (e.u, e.v));
        edges.dedup_by(|a, b| a.u == b.u && a.v == b.v);
        Ok(NeighborGraph {
            node_count: self.node_count(),
            edges,
        })
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n.saturating_sub(1) {
        return Err(DecwaError::config(format!(
            "k must lie in [1, {}] for {n} points, got {k}",
            n.saturating_sub(1)
        )));
    }
    Ok(())
}

/// Undirected weighted graph without duplicate pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    pub node_count: usize,
    pub edges: Vec<WeightedEdge>,
}

impl NeighborGraph {
    /// Validates and normalizes a hand-built edge list.
    pub fn from_edges(node_count: usize, edges: Vec<WeightedEdge>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            if e.u == e.v || e.u >= node_count || e.v >= node_count {
                return Err(DecwaError::config(format!(
                    "invalid edge ({}, {}) for {node_count} nodes",
                    e.u, e.v
                )));
            }
            if !(e.w >= 0.0 && e.w.is_finite()) {
                return Err(DecwaError::data(format!(
                    "edge ({}, {}) has invalid weight {}",
                    e.u, e.v, e.w
                )));
            }
            normalized.push(WeightedEdge::new(e.u, e.v, e.w));
        }
        normalized.sort_unstable_by_key(|e| (e.u, e.v));
        if normalized
            .windows(2)
            .any(|w| w[0].u == w[1].u && w[0].v == w[1].v)
        {
            return Err(DecwaError::config("duplicate edge in graph"));
        }
        Ok(NeighborGraph {
            node_count,
            edges: normalized,
        })
    }
}

/// Union-symmetrized k-nearest-neighbor graph with exact pairwise distances.
///
/// Ties at the k-th distance go to the smaller node index.
pub fn build_knn_graph(points: &[Point], k: usize, metric: MetricKind) -> Result<NeighborGraph> {
    NeighborTable::build(points, k, metric)?.graph(k)
}

#[derive(Debug, Clone)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    /// Dense component labels numbered by smallest member.
    pub(crate) fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut root_label = vec![usize::MAX; n];
        let mut next = 0;
        (0..n)
            .map(|i| {
                let r = self.find(i);
                if root_label[r] == usize::MAX {
                    root_label[r] = next;
                    next += 1;
                }
                root_label[r]
            })
            .collect()
    }
}

/// Minimum spanning forest, one tree per connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningForest {
    pub node_count: usize,
    /// Edges in Kruskal acceptance order.
    pub edges: Vec<WeightedEdge>,
    /// Component index per node, numbered by smallest member.
    pub component_ids: Vec<usize>,
}

impl SpanningForest {
    pub fn component_count(&self) -> usize {
        self.component_ids.iter().max().map_or(0, |m| m + 1)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.w).collect()
    }
}

/// Kruskal's algorithm with `(w, min(u,v), max(u,v))` tie-breaking.
pub fn minimum_spanning_forest(graph: &NeighborGraph) -> SpanningForest {
    let mut sorted = graph.edges.clone();
    sorted.sort_unstable_by(WeightedEdge::canonical_cmp);
    let mut dsu = DisjointSet::new(graph.node_count);
    let mut edges = Vec::with_capacity(graph.node_count.saturating_sub(1));
    for e in sorted {
        if dsu.union(e.u, e.v) {
            edges.push(e);
            if edges.len() + 1 == graph.node_count {
                break;
            }
        }
    }
    SpanningForest {
        node_count: graph.node_count,
        edges,
        component_ids: dsu.labels(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::new(vec![x]).unwrap()).collect()
    }

    #[test]
    fn knn_on_a_line() {
        let g = build_knn_graph(&line(&[0.0, 1.0, 10.0]), 1, MetricKind::Euclidean).unwrap();
        assert_eq!(
            g.edges,
            vec![WeightedEdge::new(0, 1, 1.0), WeightedEdge::new(1, 2, 9.0)]
        );
    }

    #[test]
    fn two_points_single_edge() {
        let g = build_knn_graph(&line(&[2.0, 5.0]), 1, MetricKind::Manhattan).unwrap();
        assert_eq!(g.edges, vec![WeightedEdge::new(0, 1, 3.0)]);
    }

    #[test]
    fn ties_prefer_smaller_index() {
        // Node 1 is equidistant from 0 and 2.
        let g = build_knn_graph(&line(&[0.0, 1.0, 2.0]), 1, MetricKind::Euclidean).unwrap();
        let t = NeighborTable::build(&line(&[0.0, 1.0, 2.0]), 2, MetricKind::Euclidean).unwrap();
        assert_eq!(t.neighbors(1, 1), &[(0, 1.0)]);
        assert_eq!(g.edges.len(), 2);
    }

    #[test]
    fn k_out_of_range() {
        let pts = line(&[0.0, 1.0, 2.0]);
        assert!(matches!(
            build_knn_graph(&pts, 0, MetricKind::Euclidean),
            Err(DecwaError::Config(_))
        ));
        assert!(matches!(
            build_knn_graph(&pts, 3, MetricKind::Euclidean),
            Err(DecwaError::Config(_))
        ));
        assert!(build_knn_graph(&pts[..1], 1, MetricKind::Euclidean).is_err());
    }

    #[test]
    fn triangle_drops_heaviest() {
        let g = NeighborGraph::from_edges(
            3,
            vec![
                WeightedEdge::new(0, 1, 1.0),
                WeightedEdge::new(1, 2, 2.0),
                WeightedEdge::new(0, 2, 3.0),
            ],
        )
        .unwrap();
        let f = minimum_spanning_forest(&g);
        assert_eq!(f.weights(), vec![1.0, 2.0]);
        assert_eq!(f.component_count(), 1);
    }

    #[test]
    fn disjoint_pairs_make_two_trees() {
        let g = NeighborGraph::from_edges(
            4,
            vec![WeightedEdge::new(0, 1, 1.0), WeightedEdge::new(2, 3, 4.0)],
        )
        .unwrap();
        let f = minimum_spanning_forest(&g);
        assert_eq!(f.edges.len(), 2);
        assert_eq!(f.component_ids, vec![0, 0, 1, 1]);
    }

    #[test]
    fn edgeless_graph_gives_singletons() {
        let g = NeighborGraph::from_edges(3, vec![]).unwrap();
        let f = minimum_spanning_forest(&g);
        assert!(f.edges.is_empty());
        assert_eq!(f.component_ids, vec![0, 1, 2]);
    }

    #[test]
    fn from_edges_validation() {
        assert!(NeighborGraph::from_edges(2, vec![WeightedEdge::new(0, 0, 1.0)]).is_err());
        assert!(NeighborGraph::from_edges(2, vec![WeightedEdge::new(0, 2, 1.0)]).is_err());
        assert!(NeighborGraph::from_edges(2, vec![WeightedEdge::new(0, 1, -1.0)]).is_err());
        assert!(NeighborGraph::from_edges(
            2,
            vec![WeightedEdge::new(0, 1, 1.0), WeightedEdge::new(1, 0, 2.0)]
        )
        .is_err());
    }
}
