#![allow(clippy::needless_range_loop)]
mod common;

use critnode::baselines::{next_node, run_baseline, BaselineKind, BaselineStrategy};
use critnode::dismantle::{anc, removal_count, RemovalList};
use critnode::graph::{
    betweenness, clustering_coefficients, core_decomposition, core_decomposition_masked, degrees,
    eigenvector_centrality, generate_ba, harmonic_closeness, khop_counts, load_edge_list, pagerank, write_edge_list,
    Graph, NodeMask, PageRankParams,
};
use rand::Rng;

fn graphs(seed: u64, count: usize, max_n: usize) -> Vec<Graph> {
    let mut rng = common::rng(seed);
    (0..count).map(|_| common::random_graph(&mut rng, max_n)).collect()
}

#[test]
fn betweenness_matches_path_enumeration() {
    for g in graphs(11, 150, 9) {
        let fast = betweenness(&g);
        let slow = common::betweenness_oracle(&g);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-9, "{fast:?} vs {slow:?}");
        }
    }
}

#[test]
fn coreness_matches_peeling_definition() {
    for g in graphs(12, 200, 14) {
        assert_eq!(core_decomposition(&g), common::coreness_oracle(&g));
    }
}

#[test]
fn masked_coreness_matches_induced_subgraph() {
    let mut rng = common::rng(13);
    for g in graphs(14, 100, 12) {
        let n = g.node_count();
        let mut mask = NodeMask::for_graph(&g);
        for v in 0..n {
            if rng.random_bool(0.3) {
                mask.remove(v);
            }
        }
        let keep: Vec<usize> = mask.surviving().collect();
        let index: std::collections::HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let edges: Vec<_> = g
            .edges()
            .filter_map(|(u, v)| Some((*index.get(&u)?, *index.get(&v)?)))
            .collect();
        let sub = Graph::from_edges(keep.len(), &edges).unwrap();
        let expected = common::coreness_oracle(&sub);
        let got = core_decomposition_masked(&g, &mask);
        for (i, &v) in keep.iter().enumerate() {
            assert_eq!(got[v], expected[i]);
        }
        assert!((0..n).filter(|&v| mask.is_removed(v)).all(|v| got[v] == 0));
    }
}

#[test]
fn distance_metrics_match_bfs() {
    for g in graphs(15, 100, 12) {
        let n = g.node_count();
        let h = harmonic_closeness(&g);
        for v in 0..n {
            let d = common::bfs(&g, v);
            let expected: f64 = (0..n)
                .filter(|&u| u != v && d[u] != usize::MAX)
                .map(|u| 1.0 / d[u] as f64)
                .sum();
            assert!((h[v] - expected).abs() < 1e-12);
            for k in 1..=4 {
                let count = (0..n).filter(|&u| u != v && d[u] <= k).count();
                assert_eq!(khop_counts(&g, k)[v], count);
            }
        }
    }
}

#[test]
fn clustering_matches_triangle_count() {
    for g in graphs(16, 100, 10) {
        let c = clustering_coefficients(&g);
        for v in 0..g.node_count() {
            let nb = g.neighbors(v);
            let d = nb.len();
            let mut t = 0;
            for i in 0..d {
                for j in i + 1..d {
                    if g.neighbors(nb[i]).contains(&nb[j]) {
                        t += 1;
                    }
                }
            }
            let expected = if d < 2 {
                0.0
            } else {
                2.0 * t as f64 / (d * (d - 1)) as f64
            };
            assert!((c[v] - expected).abs() < 1e-15);
        }
    }
}

/// Solves the PageRank fixed point directly by Gaussian elimination.
fn pagerank_dense(g: &Graph, d: f64) -> Vec<f64> {
    let n = g.node_count();
    let nf = n as f64;
    // x = (1-d)/n + d * (M x + dangling(x)/n), rows as [A | b]
    let mut a = vec![vec![0.0; n + 1]; n];
    for v in 0..n {
        a[v][v] += 1.0;
        for &u in g.neighbors(v) {
            a[v][u] -= d / g.degree(u) as f64;
        }
        for u in (0..n).filter(|&u| g.degree(u) == 0) {
            a[v][u] -= d / nf;
        }
        a[v][n] = (1.0 - d) / nf;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    (0..n).map(|v| a[v][n] / a[v][v]).collect()
}

#[test]
fn pagerank_matches_linear_solve() {
    let params = PageRankParams {
        max_iter: 1000,
        tol: 1e-14,
        ..Default::default()
    };
    for g in graphs(17, 60, 12) {
        let pr = pagerank(&g, params);
        let exact = pagerank_dense(&g, params.damping);
        for (a, b) in pr.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-9, "{pr:?} vs {exact:?}");
        }
        assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn eigenvector_is_an_eigenvector_on_connected_graphs() {
    let mut checked = 0;
    for g in graphs(18, 200, 12) {
        let n = g.node_count();
        if n < 3
            || critnode::graph::connected_components(&g, &NodeMask::for_graph(&g))
                .component_sizes
                .len()
                != 1
        {
            continue;
        }
        let x = eigenvector_centrality(&g, 1e-13, 100_000);
        let ax: Vec<f64> = (0..n).map(|v| g.neighbors(v).iter().map(|&u| x[u]).sum()).collect();
        let lambda: f64 = ax.iter().zip(&x).map(|(a, b)| a * b).sum();
        for v in 0..n {
            assert!((ax[v] - lambda * x[v]).abs() < 1e-6, "residual at {v}");
            assert!(x[v] > 0.0);
        }
        checked += 1;
    }
    assert!(checked > 50);
}

#[test]
fn anc_matches_recount_on_larger_graphs() {
    let mut rng = common::rng(19);
    for _ in 0..40 {
        let g = common::random_graph_with_edge(&mut rng, 30);
        let n = g.node_count();
        let perm = common::random_permutation(&mut rng, n);
        let l = rng.random_range(1..n);
        let curve = anc(&g, &RemovalList::new(perm[..l].to_vec(), n).unwrap()).unwrap();
        let (ratios, mean) = common::anc_oracle(&g, &perm[..l]);
        assert_eq!(curve.ratios, ratios);
        assert!((curve.value() - mean).abs() < 1e-12);
    }
}

#[test]
fn ba_graphs_are_simple_and_reproducible() {
    for (n, m, seed) in [(10, 1, 0), (50, 2, 3), (300, 3, 9), (1000, 3, 42)] {
        let g = generate_ba(n, m, seed).unwrap();
        assert_eq!(g.node_count(), n);
        assert_eq!(g.edge_count(), m + m * (n - m - 1));
        let mut seen = std::collections::HashSet::new();
        for (u, v) in g.edges() {
            assert_ne!(u, v);
            assert!(seen.insert((u, v)));
        }
        assert_eq!(
            g.edges().collect::<Vec<_>>(),
            generate_ba(n, m, seed).unwrap().edges().collect::<Vec<_>>()
        );
    }
    assert!(generate_ba(3, 3, 0).is_err());
}

#[test]
fn edge_list_round_trip() {
    let g = generate_ba(120, 3, 4).unwrap();
    let mut buf = Vec::new();
    write_edge_list(&g, &mut buf).unwrap();
    let h = load_edge_list(std::io::Cursor::new(buf)).unwrap();
    assert_eq!(h.node_count(), g.node_count());
    assert_eq!(h.edge_count(), g.edge_count());
    let relabel = |x: &Graph, v: usize| x.label(v).to_string();
    let mut a: Vec<_> = g.edges().map(|(u, v)| (relabel(&g, u), relabel(&g, v))).collect();
    let mut b: Vec<_> = h
        .edges()
        .map(|(u, v)| {
            let (x, y) = (relabel(&h, u), relabel(&h, v));
            if x.parse::<usize>().unwrap() < y.parse::<usize>().unwrap() {
                (x, y)
            } else {
                (y, x)
            }
        })
        .collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn baselines_respect_their_selection_rules() {
    let mut rng = common::rng(20);
    for trial in 0..60 {
        let g = common::random_graph_with_edge(&mut rng, 25);
        let n = g.node_count();
        if n < 2 {
            continue;
        }
        for kind in BaselineKind::ALL {
            let mut s = BaselineStrategy::new(kind, trial);
            let mut mask = NodeMask::for_graph(&g);
            let l = removal_count(0.5, n).unwrap();
            for _ in 0..l {
                let deg = degrees(&g, &mask);
                let core = core_decomposition_masked(&g, &mask);
                let v = next_node(&mut s, &g, &mask).unwrap();
                assert!(!mask.is_removed(v));
                let survivors: Vec<usize> = mask.surviving().collect();
                match kind {
                    BaselineKind::Dc => {
                        assert_eq!(deg[v], survivors.iter().map(|&u| deg[u]).max().unwrap());
                    }
                    _ => {
                        assert_eq!(core[v], survivors.iter().map(|&u| core[u]).max().unwrap());
                    }
                }
                mask.remove(v);
            }
            let (list, curve) = run_baseline(kind, trial, &g, 0.5).unwrap();
            assert_eq!(list.len(), l);
            assert_eq!(curve.ratios.len(), l);
            let mut sorted = list.nodes().to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), l);
        }
    }
}
