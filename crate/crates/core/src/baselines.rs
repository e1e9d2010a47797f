//! Adaptive reference heuristics: highest degree (DC), highest degree in
//! the top k-core (CoreHD), and CoreHD with the weak-neighbor tie-break
//! (WN).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dismantle::{anc, dismantle_adaptive, AncCurve, DismantleError, RemovalList, Strategy};
use crate::graph::{core_decomposition_masked, degrees, Graph, NodeMask};
use crate::seed::{self, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Dc,
    CoreHd,
    Wn,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [BaselineKind::Dc, BaselineKind::CoreHd, BaselineKind::Wn];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Dc => "dc",
            BaselineKind::CoreHd => "corehd",
            BaselineKind::Wn => "wn",
        }
    }

    /// Whether the result depends on the seed.
    pub fn is_randomized(self) -> bool {
        self == BaselineKind::CoreHd
    }
}

impl std::str::FromStr for BaselineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown baseline `{s}` (expected dc, corehd or wn)"))
    }
}

#[derive(Debug, Clone)]
pub struct BaselineStrategy {
    pub kind: BaselineKind,
    pub seed: u64,
    rng: SeededRng,
}

impl BaselineStrategy {
    pub fn new(kind: BaselineKind, seed: u64) -> Self {
        Self {
            kind,
            seed,
            rng: seed::rng(seed),
        }
    }
}

impl Strategy for BaselineStrategy {
    fn next_node(&mut self, g: &Graph, mask: &NodeMask) -> Result<usize, DismantleError> {
        next_node(self, g, mask)
    }
}

/// All candidates sharing the maximum key, in input order.
fn argmax_by_key(candidates: &[usize], key: impl Fn(usize) -> usize) -> Vec<usize> {
    let best = candidates.iter().map(|&v| key(v)).max().unwrap_or(0);
    candidates.iter().copied().filter(|&v| key(v) == best).collect()
}

pub fn next_node(strategy: &mut BaselineStrategy, g: &Graph, mask: &NodeMask) -> Result<usize, DismantleError> {
    let survivors: Vec<usize> = mask.surviving().collect();
    if survivors.is_empty() {
        return Err(DismantleError::NoSurvivors);
    }
    let deg = degrees(g, mask);
    if strategy.kind == BaselineKind::Dc {
        return Ok(argmax_by_key(&survivors, |v| deg[v])[0]);
    }

    let core = core_decomposition_masked(g, mask);
    let top = survivors.iter().map(|&v| core[v]).max().unwrap_or(0);
    // On a forest there is no core to target; fall back to plain degree.
    let (candidates, in_scope): (Vec<usize>, Box<dyn Fn(usize) -> bool>) = if top <= 1 {
        (survivors, Box::new(|w| !mask.is_removed(w)))
    } else {
        let core_ref = &core;
        (
            survivors.into_iter().filter(|&v| core[v] == top).collect(),
            Box::new(move |w| !mask.is_removed(w) && core_ref[w] == top),
        )
    };
    let scoped_degree = |v: usize| g.neighbors(v).iter().filter(|&&w| in_scope(w)).count();
    let tied = argmax_by_key(&candidates, scoped_degree);

    match strategy.kind {
        BaselineKind::CoreHd => Ok(tied[strategy.rng.random_range(0..tied.len())]),
        BaselineKind::Wn => {
            let weakest_neighbor = |v: usize| {
                g.neighbors(v)
                    .iter()
                    .filter(|&&w| in_scope(w))
                    .map(|&w| scoped_degree(w))
                    .min()
                    .unwrap_or(usize::MAX)
            };
            Ok(*tied
                .iter()
                .min_by_key(|&&v| (weakest_neighbor(v), v))
                .expect("tied set is non-empty"))
        }
        BaselineKind::Dc => unreachable!(),
    }
}

/// Runs one baseline adaptively and measures its ANC curve.
pub fn run_baseline(
    kind: BaselineKind,
    seed: u64,
    g: &Graph,
    fraction: f64,
) -> Result<(RemovalList, AncCurve), DismantleError> {
    let mut strategy = BaselineStrategy::new(kind, seed);
    let removal = dismantle_adaptive(g, &mut strategy, fraction)?;
    let curve = anc(g, &removal)?;
    Ok((removal, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    fn first(kind: BaselineKind, g: &Graph, seed: u64) -> usize {
        BaselineStrategy::new(kind, seed)
            .next_node(g, &NodeMask::for_graph(g))
            .unwrap()
    }

    #[test]
    fn dc_takes_star_center() {
        assert_eq!(first(BaselineKind::Dc, &star(5), 0), 0);
    }

    #[test]
    fn dc_breaks_ties_by_index() {
        assert_eq!(first(BaselineKind::Dc, &path(5), 0), 1);
    }

    #[test]
    fn corehd_prefers_the_two_core() {
        let g = triangle_plus_pendant();
        for seed in 0..20 {
            let v = first(BaselineKind::CoreHd, &g, seed);
            assert!(v <= 2);
            // degree inside the 2-core is 2 for all three triangle nodes
        }
        let picks: std::collections::HashSet<_> = (0..50).map(|s| first(BaselineKind::CoreHd, &g, s)).collect();
        assert!(picks.len() > 1, "ties should be broken randomly");
    }

    #[test]
    fn wn_breaks_ties_by_weakest_neighbor() {
        // Whole graph is a 2-core. Hubs 0 and 1 both have degree 4; hub 1's
        // bow-tie neighbors have degree 2, hub 0's neighbors degree 3.
        let mut edges = vec![(1, 2), (1, 3), (1, 4), (1, 5), (2, 3), (4, 5)];
        edges.extend([
            (0, 6),
            (0, 7),
            (0, 8),
            (0, 9),
            (6, 7),
            (8, 9),
            (6, 10),
            (10, 7),
            (8, 11),
            (11, 9),
        ]);
        let g = Graph::from_edges(12, &edges).unwrap();
        assert_eq!(crate::graph::core_decomposition(&g), vec![2; 12]);
        assert_eq!(first(BaselineKind::Wn, &g, 0), 1);
        assert_eq!(first(BaselineKind::Dc, &g, 0), 0);
    }

    #[test]
    fn forest_falls_back_to_degree() {
        assert_eq!(first(BaselineKind::Wn, &star(6), 0), 0);
        assert_eq!(first(BaselineKind::CoreHd, &star(6), 3), 0);
    }

    #[test]
    fn no_survivors_is_an_error() {
        let g = path(2);
        let mask = NodeMask::from_removed(2, &[0, 1]);
        let mut s = BaselineStrategy::new(BaselineKind::Dc, 0);
        assert_eq!(s.next_node(&g, &mask), Err(DismantleError::NoSurvivors));
    }

    #[test]
    fn run_baseline_produces_l_distinct_nodes() {
        let g = crate::graph::generate_ba(100, 3, 2).unwrap();
        for kind in BaselineKind::ALL {
            let (removal, curve) = run_baseline(kind, 1, &g, 0.2).unwrap();
            assert_eq!(removal.len(), 20);
            assert_eq!(curve.ratios.len(), 20);
        }
    }

    #[test]
    fn parses_names() {
        assert_eq!("corehd".parse::<BaselineKind>().unwrap(), BaselineKind::CoreHd);
        assert!("gnd".parse::<BaselineKind>().is_err());
    }
}
