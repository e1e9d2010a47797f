//! Centrality vectors. All floating point sums go through
//! [`crate::numeric::ExactSum`] so that results depend only on graph
//! structure, never on node numbering or iteration order.

use std::collections::VecDeque;

use super::Graph;
use crate::numeric::{exact_sum, ExactSum};

/// Brandes betweenness on unweighted shortest paths. Undirected: each
/// unordered pair contributes once. Endpoints excluded, no normalization.
pub fn betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut totals: Vec<ExactSum> = vec![ExactSum::new(); n];
    let mut dist = vec![usize::MAX; n];
    let mut sigma = vec![0f64; n];
    let mut delta = vec![0f64; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for s in 0..n {
        order.clear();
        for v in 0..n {
            dist[v] = usize::MAX;
            sigma[v] = 0.0;
            delta[v] = 0.0;
        }
        dist[s] = 0;
        sigma[s] = 1.0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        // Path counts: integer-valued, exact in f64 for any realistic graph.
        for &v in &order[1..] {
            sigma[v] = g
                .neighbors(v)
                .iter()
                .filter(|&&u| dist[u] != usize::MAX && dist[u] + 1 == dist[v])
                .map(|&u| sigma[u])
                .sum();
        }
        // Dependencies, deepest first; each node's successors are all
        // finished before it is visited.
        for &v in order.iter().rev() {
            let mut acc = ExactSum::new();
            for &w in g.neighbors(v) {
                if dist[w] == dist[v] + 1 {
                    acc.add(sigma[v] / sigma[w] * (1.0 + delta[w]));
                }
            }
            delta[v] = acc.value();
            if v != s {
                totals[v].add(delta[v]);
            }
        }
    }
    totals.iter().map(|t| t.value() / 2.0).collect()
}

fn bfs_distances(
    g: &Graph,
    source: usize,
    limit: usize,
    dist: &mut [usize],
    queue: &mut VecDeque<usize>,
    visited: &mut Vec<usize>,
) {
    for &v in visited.iter() {
        dist[v] = usize::MAX;
    }
    visited.clear();
    dist[source] = 0;
    visited.push(source);
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        if dist[v] == limit {
            continue;
        }
        for &w in g.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                visited.push(w);
                queue.push_back(w);
            }
        }
    }
}

/// Harmonic closeness: sum of `1 / d(v, u)` over reachable `u != v`.
pub fn harmonic_closeness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut visited = Vec::new();
    (0..n)
        .map(|v| {
            bfs_distances(g, v, usize::MAX, &mut dist, &mut queue, &mut visited);
            exact_sum(visited.iter().filter(|&&u| u != v).map(|&u| 1.0 / dist[u] as f64))
        })
        .collect()
}

/// Number of distinct nodes within `k` hops, excluding the node itself.
pub fn khop_counts(g: &Graph, k: usize) -> Vec<usize> {
    let n = g.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut visited = Vec::new();
    (0..n)
        .map(|v| {
            bfs_distances(g, v, k, &mut dist, &mut queue, &mut visited);
            visited.len() - 1
        })
        .collect()
}

/// Local clustering: `2 T(v) / (d (d - 1))`, zero below degree 2.
pub fn clustering_coefficients(g: &Graph) -> Vec<f64> {
    (0..g.node_count())
        .map(|v| {
            let nv = g.neighbors(v);
            let d = nv.len();
            if d < 2 {
                return 0.0;
            }
            let mut links = 0usize;
            for &u in nv {
                links += sorted_intersection(nv, g.neighbors(u));
            }
            // each triangle edge seen from both endpoints
            let triangles = links / 2;
            2.0 * triangles as f64 / (d * (d - 1)) as f64
        })
        .collect()
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankParams {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-9,
            max_iter: 100,
        }
    }
}

/// Power iteration on the undirected random walk with uniform teleport.
/// Mass on degree-0 nodes is redistributed uniformly.
pub fn pagerank(g: &Graph, params: PageRankParams) -> Vec<f64> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let d = params.damping;
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..params.max_iter {
        let dangling = exact_sum((0..n).filter(|&v| g.degree(v) == 0).map(|v| rank[v]));
        let base = (1.0 - d) / nf + d * dangling / nf;
        for (v, slot) in next.iter_mut().enumerate() {
            let inflow = exact_sum(g.neighbors(v).iter().map(|&u| rank[u] / g.degree(u) as f64));
            *slot = base + d * inflow;
        }
        let change = exact_sum((0..n).map(|v| (next[v] - rank[v]).abs()));
        std::mem::swap(&mut rank, &mut next);
        if change < params.tol {
            break;
        }
    }
    rank
}

pub const DEFAULT_EIGEN_TOL: f64 = 1e-9;
pub const DEFAULT_EIGEN_MAX_ITER: usize = 1000;

/// Eigenvector centrality by power iteration on `A + I` (same leading
/// eigenvector as `A`, but converges on bipartite graphs), starting from
/// the uniform unit vector. If an iterate has zero norm the previous one is
/// returned unchanged.
pub fn eigenvector_centrality(g: &Graph, tol: f64, max_iter: usize) -> Vec<f64> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    for _ in 0..max_iter {
        for v in 0..n {
            let mut acc = ExactSum::new();
            acc.add(x[v]);
            acc.extend(g.neighbors(v).iter().map(|&u| x[u]));
            y[v] = acc.value();
        }
        let norm = exact_sum(y.iter().map(|a| a * a)).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return x;
        }
        for a in y.iter_mut() {
            *a /= norm;
        }
        let change = exact_sum(x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b))).sqrt();
        std::mem::swap(&mut x, &mut y);
        if change < tol {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn betweenness_examples() {
        assert_eq!(betweenness(&path(3)), vec![0.0, 1.0, 0.0]);
        assert_eq!(betweenness(&complete(4)), vec![0.0; 4]);
        // star: center lies on all C(4,2) leaf pairs
        assert_eq!(betweenness(&star(5))[0], 6.0);
    }

    #[test]
    fn harmonic_examples() {
        let h = harmonic_closeness(&path(3));
        assert_eq!(h, vec![1.5, 2.0, 1.5]);
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(harmonic_closeness(&g), vec![1.0; 4]);
        let g = Graph::from_edges(1, &[]).unwrap();
        assert_eq!(harmonic_closeness(&g), vec![0.0]);
    }

    #[test]
    fn khop_examples() {
        assert_eq!(khop_counts(&path(3), 1), vec![1, 2, 1]);
        assert_eq!(khop_counts(&path(3), 2), vec![2, 2, 2]);
        assert_eq!(khop_counts(&path(6), 10), vec![5; 6]);
    }

    #[test]
    fn clustering_examples() {
        assert_eq!(clustering_coefficients(&complete(3)), vec![1.0; 3]);
        assert_eq!(clustering_coefficients(&star(5)), vec![0.0; 5]);
        // K4 minus edge (2,3): nodes 0 and 1 have degree 3 and sit in 2 triangles
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let c = clustering_coefficients(&g);
        assert!((c[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((c[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c[2], 1.0);
    }

    #[test]
    fn pagerank_examples() {
        let p = pagerank(&complete(3), PageRankParams::default());
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        let single = Graph::from_edges(1, &[]).unwrap();
        assert_eq!(pagerank(&single, PageRankParams::default()), vec![1.0]);
        let p = pagerank(&star(5), PageRankParams::default());
        assert!(p[0] > p[1]);
        assert!(p[1..].iter().all(|&x| x == p[1]));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn pagerank_handles_isolated_nodes() {
        let g = Graph::from_edges(4, &[(0, 1)]).unwrap();
        let p = pagerank(&g, PageRankParams::default());
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        assert_eq!(p[2], p[3]);
    }

    #[test]
    fn eigenvector_examples() {
        let e = eigenvector_centrality(&complete(3), DEFAULT_EIGEN_TOL, DEFAULT_EIGEN_MAX_ITER);
        assert!(e.iter().all(|&x| x == e[0]));
        let e = eigenvector_centrality(&star(5), DEFAULT_EIGEN_TOL, DEFAULT_EIGEN_MAX_ITER);
        assert!(e[0] > e[1]);
        assert!(e[1..].iter().all(|&x| x == e[1]));
        assert!(e.iter().all(|&x| x >= 0.0));
        let empty = Graph::from_edges(4, &[]).unwrap();
        assert_eq!(eigenvector_centrality(&empty, 1e-9, 100), vec![0.5; 4]);
    }
}
