//! Immutable undirected graphs in compressed adjacency form, plus the
//! connectivity and centrality primitives built on top of them.

mod centrality;
mod generate;
mod io;
mod kcore;

use serde::Serialize;
use thiserror::Error;

pub use centrality::{
    betweenness, clustering_coefficients, eigenvector_centrality, harmonic_closeness, khop_counts, pagerank,
    PageRankParams, DEFAULT_EIGEN_MAX_ITER, DEFAULT_EIGEN_TOL,
};
pub use generate::generate_ba;
pub use io::{load_edge_list, write_edge_list};
pub use kcore::{core_decomposition, core_decomposition_masked};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected simple graph. Nodes are dense indices `0..node_count`;
/// `labels` keeps the original identifiers for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    labels: Vec<String>,
}

impl Graph {
    /// Builds a graph from an edge list over `0..node_count`. Self-loops are
    /// dropped, duplicate and reversed edges merged. Labels default to the
    /// decimal index.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let labels = (0..node_count).map(|i| i.to_string()).collect();
        Self::from_labeled_edges(labels, edges)
    }

    pub fn from_labeled_edges(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let n = labels.len();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for mut list in adjacency {
            list.sort_unstable();
            list.dedup();
            neighbors.extend(list);
            offsets.push(neighbors.len());
        }
        Ok(Self {
            offsets,
            neighbors,
            labels,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count())
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Relabels node `v` as `perm[v]`. `perm` must be a permutation of
    /// `0..node_count`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, GraphError> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(GraphError::InvalidArgument("not a permutation".into()));
        }
        let mut labels = vec![String::new(); n];
        for (v, &p) in perm.iter().enumerate() {
            labels[p] = self.labels[v].clone();
        }
        let edges: Vec<_> = self.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        Self::from_labeled_edges(labels, &edges)
    }
}

/// Marks removed nodes; represents `G \ {v1..vk}` without copying the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeMask {
    removed: Vec<bool>,
    removed_count: usize,
}

impl NodeMask {
    pub fn new(node_count: usize) -> Self {
        Self {
            removed: vec![false; node_count],
            removed_count: 0,
        }
    }

    pub fn for_graph(g: &Graph) -> Self {
        Self::new(g.node_count())
    }

    pub fn from_removed(node_count: usize, removed: &[usize]) -> Self {
        let mut mask = Self::new(node_count);
        for &v in removed {
            mask.remove(v);
        }
        mask
    }

    pub fn len(&self) -> usize {
        self.removed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
    }

    /// Returns false if `v` was already removed.
    pub fn remove(&mut self, v: usize) -> bool {
        if self.removed[v] {
            return false;
        }
        self.removed[v] = true;
        self.removed_count += 1;
        true
    }

    #[inline]
    pub fn is_removed(&self, v: usize) -> bool {
        self.removed[v]
    }

    pub fn surviving_count(&self) -> usize {
        self.removed.len() - self.removed_count
    }

    pub fn surviving(&self) -> impl Iterator<Item = usize> + '_ {
        self.removed.iter().enumerate().filter(|(_, &r)| !r).map(|(v, _)| v)
    }
}

/// Connected components of the surviving subgraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentPartition {
    /// Component id per node index; `None` for removed nodes.
    pub component_id: Vec<Option<usize>>,
    pub component_sizes: Vec<usize>,
}

impl ComponentPartition {
    pub fn count(&self) -> usize {
        self.component_sizes.len()
    }
}

fn check_mask(g: &Graph, mask: &NodeMask) {
    assert_eq!(mask.len(), g.node_count(), "mask length does not match graph");
}

pub fn connected_components(g: &Graph, mask: &NodeMask) -> ComponentPartition {
    check_mask(g, mask);
    let n = g.node_count();
    let mut component_id = vec![None; n];
    let mut component_sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if mask.is_removed(start) || component_id[start].is_some() {
            continue;
        }
        let id = component_sizes.len();
        component_id[start] = Some(id);
        stack.push(start);
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &w in g.neighbors(u) {
                if !mask.is_removed(w) && component_id[w].is_none() {
                    component_id[w] = Some(id);
                    stack.push(w);
                }
            }
        }
        component_sizes.push(size);
    }
    ComponentPartition {
        component_id,
        component_sizes,
    }
}

#[inline]
pub(crate) fn pairs(size: u64) -> u64 {
    size * size.saturating_sub(1) / 2
}

/// Number of unordered node pairs still joined by a path: the sum over
/// components of `|C| choose 2`.
pub fn pairwise_connectivity(g: &Graph, mask: &NodeMask) -> u64 {
    connected_components(g, mask)
        .component_sizes
        .iter()
        .map(|&s| pairs(s as u64))
        .sum()
}

/// Degrees in the surviving subgraph; removed nodes report 0.
pub fn degrees(g: &Graph, mask: &NodeMask) -> Vec<usize> {
    check_mask(g, mask);
    (0..g.node_count())
        .map(|v| {
            if mask.is_removed(v) {
                0
            } else {
                g.neighbors(v).iter().filter(|&&w| !mask.is_removed(w)).count()
            }
        })
        .collect()
}
