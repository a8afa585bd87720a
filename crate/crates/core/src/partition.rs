//! Division of the spanning forest into sub-clusters by successive threshold
//! extraction, and agglomeration of sub-clusters that are both spatially
//! adjacent and similar in their edge-length distributions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::density::ThresholdList;
use crate::error::{DecwaError, Result};
use crate::graph::{DisjointSet, SpanningForest, WeightedEdge};

/// A connected group of points together with the lengths of the forest edges
/// joining them. `intra_distances` is kept sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SubCluster {
    pub id: usize,
    pub members: Vec<usize>,
    pub intra_distances: Vec<f64>,
}

/// Hard assignment of every forest node to exactly one sub-cluster.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartitionState {
    pub assignment: Vec<usize>,
    pub subclusters: BTreeMap<usize, SubCluster>,
    /// Forest edges that ended up in no sub-cluster (they straddle two).
    pub discarded_edges: Vec<WeightedEdge>,
}

impl PartitionState {
    pub fn len(&self) -> usize {
        self.subclusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subclusters.is_empty()
    }

    fn push(&mut self, mut members: Vec<usize>, mut intra: Vec<f64>) {
        let id = self.subclusters.keys().next_back().map_or(0, |k| k + 1);
        members.sort_unstable();
        intra.sort_unstable_by(f64::total_cmp);
        for &m in &members {
            self.assignment[m] = id;
        }
        self.subclusters.insert(
            id,
            SubCluster {
                id,
                members,
                intra_distances: intra,
            },
        );
    }

    /// Checks that assignment and membership lists describe the same partition
    /// of `0..node_count`.
    pub fn is_consistent(&self, node_count: usize) -> bool {
        if self.assignment.len() != node_count {
            return false;
        }
        let mut seen = vec![false; node_count];
        for (&id, sc) in &self.subclusters {
            if sc.id != id || sc.members.is_empty() {
                return false;
            }
            for &m in &sc.members {
                if m >= node_count || seen[m] || self.assignment[m] != id {
                    return false;
                }
                seen[m] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Groups `nodes` into connected components over `edges`, returning each
/// component's members and edge weights. Components are ordered by their
/// smallest member.
fn components(
    node_count: usize,
    nodes: &[usize],
    edges: &[WeightedEdge],
) -> Vec<(Vec<usize>, Vec<f64>)> {
    let mut dsu = DisjointSet::new(node_count);
    for e in edges {
        dsu.union(e.u, e.v);
    }
    let mut by_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut groups: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    let mut sorted_nodes = nodes.to_vec();
    sorted_nodes.sort_unstable();
    for &n in &sorted_nodes {
        let r = dsu.find(n);
        let slot = *by_root.entry(r).or_insert_with(|| {
            groups.push((Vec::new(), Vec::new()));
            groups.len() - 1
        });
        groups[slot].0.push(n);
    }
    for e in edges {
        let slot = by_root[&dsu.find(e.u)];
        groups[slot].1.push(e.w);
    }
    groups
}

/// Splits the forest by treating thresholds from largest to smallest.
///
/// At threshold `t`, nodes whose every remaining edge is longer than `t` are
/// extracted; their connected pieces (over edges longer than `t`) become
/// sub-clusters. Edges no longer than `t` form the residual graph for the next
/// threshold, and edges longer than `t` that touch a retained node are
/// dropped. Whatever remains after the last threshold is split into its
/// connected components.
pub fn divide(forest: &SpanningForest, thresholds: &ThresholdList) -> PartitionState {
    let n = forest.node_count;
    let mut state = PartitionState {
        assignment: vec![usize::MAX; n],
        subclusters: BTreeMap::new(),
        discarded_edges: Vec::new(),
    };
    let mut residual_nodes: Vec<usize> = (0..n).collect();
    let mut residual_edges: Vec<WeightedEdge> = forest.edges.clone();

    for &t in thresholds.as_slice() {
        // A node qualifies when none of its residual edges is <= t.
        let mut has_low = vec![false; n];
        for e in residual_edges.iter().filter(|e| e.w <= t) {
            has_low[e.u] = true;
            has_low[e.v] = true;
        }
        let (low, high): (Vec<WeightedEdge>, Vec<WeightedEdge>) =
            residual_edges.into_iter().partition(|e| e.w <= t);
        let qualifying: Vec<usize> = residual_nodes
            .iter()
            .copied()
            .filter(|&v| !has_low[v])
            .collect();
        let (kept, dropped): (Vec<WeightedEdge>, Vec<WeightedEdge>) = high
            .into_iter()
            .partition(|e| !has_low[e.u] && !has_low[e.v]);
        state.discarded_edges.extend(dropped);
        for (members, intra) in components(n, &qualifying, &kept) {
            state.push(members, intra);
        }
        residual_nodes.retain(|&v| has_low[v]);
        residual_edges = low;
    }

    for (members, intra) in components(n, &residual_nodes, &residual_edges) {
        state.push(members, intra);
    }
    state
}

/// First Wasserstein distance between the empirical distributions of two
/// samples. Returns 0 when either sample is empty.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    wasserstein1_sorted(&a, &b)
}

/// [`wasserstein1`] for samples already sorted ascending.
///
/// Integrates |Fa^-1(q) - Fb^-1(q)| over q in [0, 1]. Quantile breakpoints
/// i/na and j/nb are compared in integer units of 1/(na*nb), so the merge is
/// exact and symmetric in its arguments.
pub fn wasserstein1_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as u128, b.len() as u128);
    if na == 0 || nb == 0 {
        return 0.0;
    }
    let total = na * nb;
    let (mut i, mut j) = (0usize, 0usize);
    let mut pos: u128 = 0;
    let mut acc = 0.0;
    while pos < total {
        let next_a = (i as u128 + 1) * nb;
        let next_b = (j as u128 + 1) * na;
        let next = next_a.min(next_b);
        acc += (a[i] - b[j]).abs() * (next - pos) as f64;
        pos = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    acc / total as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AgglomerationMode {
    #[default]
    SinglePass,
    Fixpoint,
}

impl AgglomerationMode {
    pub fn name(self) -> &'static str {
        match self {
            AgglomerationMode::SinglePass => "single-pass",
            AgglomerationMode::Fixpoint => "fixpoint",
        }
    }
}

impl fmt::Display for AgglomerationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgglomerationMode {
    type Err = DecwaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single-pass" | "single_pass" => Ok(AgglomerationMode::SinglePass),
            "fixpoint" => Ok(AgglomerationMode::Fixpoint),
            other => Err(DecwaError::config(format!(
                "unknown agglomeration mode '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AgglomerationStats {
    pub traversals: usize,
    pub merges: usize,
}

/// Merges sub-clusters joined by a forest edge of length at most `lambda`
/// whose edge-length distributions lie within Wasserstein distance `alpha`.
///
/// Edges are visited in ascending `(w, min(u,v), max(u,v))` order. The
/// Wasserstein test always sees the current, post-merge distance sets. A merge
/// keeps the smaller id and does not add the linking edge to the merged set.
pub fn agglomerate(
    mut state: PartitionState,
    forest: &SpanningForest,
    lambda: f64,
    alpha: f64,
    mode: AgglomerationMode,
) -> Result<(PartitionState, AgglomerationStats)> {
    if !(lambda > 0.0) {
        return Err(DecwaError::config(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(alpha >= 0.0) {
        return Err(DecwaError::config(format!(
            "alpha must be non-negative, got {alpha}"
        )));
    }
    if !state.is_consistent(forest.node_count) {
        return Err(DecwaError::config(
            "partition does not cover the forest's nodes exactly once",
        ));
    }
    let mut order = forest.edges.clone();
    order.sort_unstable_by(WeightedEdge::canonical_cmp);

    let mut stats = AgglomerationStats::default();
    loop {
        stats.traversals += 1;
        let mut merged_this_pass = 0;
        for e in &order {
            let (ci, cj) = (state.assignment[e.u], state.assignment[e.v]);
            if ci == cj || e.w > lambda {
                continue;
            }
            let ws = wasserstein1_sorted(
                &state.subclusters[&ci].intra_distances,
                &state.subclusters[&cj].intra_distances,
            );
            if ws > alpha {
                continue;
            }
            let (keep, gone) = (ci.min(cj), ci.max(cj));
            let absorbed = state.subclusters.remove(&gone).expect("assigned id exists");
            for &m in &absorbed.members {
                state.assignment[m] = keep;
            }
            let target = state
                .subclusters
                .get_mut(&keep)
                .expect("assigned id exists");
            target.members = merge_sorted(&target.members, &absorbed.members, |x, y| x < y);
            target.intra_distances = merge_sorted(
                &target.intra_distances,
                &absorbed.intra_distances,
                |x, y| x.total_cmp(y).is_lt(),
            );
            merged_this_pass += 1;
        }
        stats.merges += merged_this_pass;
        if mode == AgglomerationMode::SinglePass || merged_this_pass == 0 {
            break;
        }
    }
    Ok((state, stats))
}

fn merge_sorted<T: Copy>(a: &[T], b: &[T], less: impl Fn(&T, &T) -> bool) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if less(&b[j], &a[i]) {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
