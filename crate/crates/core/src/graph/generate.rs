use rand::Rng;

use super::{Graph, GraphError};
use crate::seed;

/// Barabási–Albert preferential attachment. The seed graph is a star on
/// `m + 1` nodes (node 0 at the center); every later node attaches to `m`
/// distinct existing nodes drawn with probability proportional to degree.
pub fn generate_ba(n: usize, m: usize, seed: u64) -> Result<Graph, GraphError> {
    if m < 1 || n <= m {
        return Err(GraphError::InvalidArgument(format!(
            "Barabási–Albert needs n > m >= 1, got n={n}, m={m}"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut edges: Vec<(usize, usize)> = (1..=m).map(|leaf| (0, leaf)).collect();
    // Each node appears once per incident edge endpoint.
    let mut endpoints: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut targets = Vec::with_capacity(m);
    for new in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((new, t));
            endpoints.push(new);
            endpoints.push(t);
        }
    }
    Graph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{connected_components, NodeMask};

    #[test]
    fn rejects_n_not_above_m() {
        assert!(generate_ba(3, 3, 0).is_err());
        assert!(generate_ba(2, 3, 0).is_err());
        assert!(generate_ba(5, 0, 0).is_err());
    }

    #[test]
    fn seed_star_only_when_n_is_m_plus_one() {
        let g = generate_ba(4, 3, 9).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degree(0), 3);
    }

    #[test]
    fn edge_count_matches_construction() {
        // m seed edges + m per attached node, none merged since targets are distinct.
        for seed in 0..5 {
            let g = generate_ba(1000, 3, seed).unwrap();
            assert_eq!(g.node_count(), 1000);
            assert_eq!(g.edge_count(), 3 + 3 * (1000 - 3 - 1));
            assert_eq!(g.edge_count(), 2991);
        }
    }

    #[test]
    fn deterministic_and_connected() {
        let a = generate_ba(10, 3, 1).unwrap();
        let b = generate_ba(10, 3, 1).unwrap();
        assert_eq!(a, b);
        let c = generate_ba(200, 2, 5).unwrap();
        assert_eq!(connected_components(&c, &NodeMask::for_graph(&c)).count(), 1);
        assert_ne!(generate_ba(50, 3, 1).unwrap(), generate_ba(50, 3, 2).unwrap());
    }
}
