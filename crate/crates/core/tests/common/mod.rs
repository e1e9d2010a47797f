//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use critnode::graph::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// G(n, p) with `n` in `1..=max_n` and `p` drawn per graph.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let n = rng.random_range(1..=max_n);
    let p: f64 = rng.random();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

pub fn random_graph_with_edge(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    loop {
        let g = random_graph(rng, max_n.max(2));
        if g.edge_count() > 0 {
            return g;
        }
    }
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

/// Reachability matrix by Warshall's transitive closure over surviving nodes.
pub fn reachability(g: &Graph, removed: &[bool]) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut r = vec![vec![false; n]; n];
    for u in 0..n {
        if removed[u] {
            continue;
        }
        r[u][u] = true;
        for &v in g.neighbors(u) {
            if !removed[v] {
                r[u][v] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Number of unordered surviving pairs that can reach each other.
pub fn sigma_oracle(g: &Graph, removed: &[bool]) -> u64 {
    let r = reachability(g, removed);
    let n = g.node_count();
    let mut count = 0;
    for i in 0..n {
        for j in i + 1..n {
            if r[i][j] {
                count += 1;
            }
        }
    }
    count
}

/// Residual connectivity ratios after each removal, each step recomputed
/// from scratch.
pub fn anc_oracle(g: &Graph, order: &[usize]) -> (Vec<f64>, f64) {
    let n = g.node_count();
    let sigma0 = sigma_oracle(g, &vec![false; n]) as f64;
    let mut removed = vec![false; n];
    let mut ratios = Vec::new();
    for &v in order {
        removed[v] = true;
        ratios.push(sigma_oracle(g, &removed) as f64 / sigma0);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    (ratios, mean)
}

/// Shortest-path distances by BFS; `usize::MAX` when unreachable.
pub fn bfs(g: &Graph, s: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; g.node_count()];
    d[s] = 0;
    let mut q = std::collections::VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &v in g.neighbors(u) {
            if d[v] == usize::MAX {
                d[v] = d[u] + 1;
                q.push_back(v);
            }
        }
    }
    d
}

/// Betweenness by enumerating every shortest path explicitly.
pub fn betweenness_oracle(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut b = vec![0.0; n];
    for s in 0..n {
        let ds = bfs(g, s);
        for t in s + 1..n {
            if ds[t] == usize::MAX || ds[t] < 2 {
                continue;
            }
            let mut paths = Vec::new();
            let mut stack = vec![vec![s]];
            while let Some(path) = stack.pop() {
                let last = *path.last().unwrap();
                if last == t {
                    paths.push(path);
                    continue;
                }
                for &w in g.neighbors(last) {
                    if ds[w] == ds[last] + 1 && ds[w] <= ds[t] {
                        let mut p = path.clone();
                        p.push(w);
                        stack.push(p);
                    }
                }
            }
            let total = paths.len() as f64;
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    b[v] += 1.0 / total;
                }
            }
        }
    }
    b
}

/// Coreness by definition: the largest k whose k-core (found by repeatedly
/// deleting nodes of degree < k) contains the node.
pub fn coreness_oracle(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut core = vec![0; n];
    for k in 1..=n {
        let mut alive = vec![true; n];
        loop {
            let mut changed = false;
            for v in 0..n {
                if alive[v] && g.neighbors(v).iter().filter(|&&w| alive[w]).count() < k {
                    alive[v] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for v in 0..n {
            if alive[v] {
                core[v] = k;
            }
        }
    }
    core
}
