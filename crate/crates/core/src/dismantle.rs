//! Removal sequences, accumulated normalized connectivity, and fitness.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{Evaluator, MetricCache, ScoreExpr};
use crate::graph::{pairs, pairwise_connectivity, Graph, NodeMask};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DismantleError {
    #[error("removal length {l} outside 1..={n}")]
    LengthOutOfRange { l: usize, n: usize },
    #[error("removal fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("graph has no edges; connectivity ratio is undefined")]
    Edgeless,
    #[error("removal list is empty")]
    EmptyRemoval,
    #[error("node {0} appears twice in the removal list")]
    Duplicate(usize),
    #[error("node {node} out of range for {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("no surviving nodes left to remove")]
    NoSurvivors,
}

/// Ordered, duplicate-free node indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RemovalList(Vec<usize>);

impl RemovalList {
    pub fn new(nodes: Vec<usize>, node_count: usize) -> Result<Self, DismantleError> {
        let mut seen = vec![false; node_count];
        for &v in &nodes {
            if v >= node_count {
                return Err(DismantleError::NodeOutOfRange { node: v, n: node_count });
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(DismantleError::Duplicate(v));
            }
        }
        Ok(Self(nodes))
    }

    pub fn nodes(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One node label per line.
    pub fn to_label_lines(&self, g: &Graph) -> String {
        let mut out = String::new();
        for &v in &self.0 {
            out.push_str(g.label(v));
            out.push('\n');
        }
        out
    }
}

/// What the `1/N` in the ANC mean divides by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AncNormalization {
    /// Mean over the removal steps.
    #[default]
    RemovalLength,
    /// Sum of ratios divided by the total node count.
    NodeCount,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AncCurve {
    /// Pairwise connectivity of the intact graph.
    pub sigma0: u64,
    /// Residual connectivity after `k` removals divided by `sigma0`, `k = 1..=L`.
    pub ratios: Vec<f64>,
    /// Node count of the graph the curve was measured on.
    pub node_count: usize,
}

impl AncCurve {
    /// Mean of the ratios: the ANC value `R`.
    pub fn value(&self) -> f64 {
        self.value_with(AncNormalization::RemovalLength)
    }

    pub fn value_with(&self, norm: AncNormalization) -> f64 {
        let total: f64 = self.ratios.iter().sum();
        match norm {
            AncNormalization::RemovalLength => total / self.ratios.len() as f64,
            AncNormalization::NodeCount => total / self.node_count as f64,
        }
    }

    pub fn terminal_ratio(&self) -> f64 {
        self.ratios.last().copied().unwrap_or(1.0)
    }

    /// `k,sigma_ratio` with one row per removal step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,sigma_ratio\n");
        for (k, r) in self.ratios.iter().enumerate() {
            let _ = writeln!(out, "{},{}", k + 1, r);
        }
        out
    }
}

fn descending_with_index(scores: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| {
        let (x, y) = (scores[a], scores[b]);
        let by_score = if x == y { Ordering::Equal } else { y.total_cmp(&x) };
        by_score.then(a.cmp(&b))
    }
}

/// The `l` highest-scored nodes, ties broken by ascending index.
pub fn top_l_by_score(scores: &[f64], l: usize) -> Result<RemovalList, DismantleError> {
    let n = scores.len();
    if l < 1 || l > n {
        return Err(DismantleError::LengthOutOfRange { l, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(descending_with_index(scores));
    order.truncate(l);
    Ok(RemovalList(order))
}

/// `round(fraction * V)` (half up), clamped to `[1, V - 1]`.
pub fn removal_count(fraction: f64, node_count: usize) -> Result<usize, DismantleError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DismantleError::InvalidFraction(fraction));
    }
    let raw = (fraction * node_count as f64 + 0.5).floor() as usize;
    Ok(raw.clamp(1, node_count.saturating_sub(1).max(1)))
}

struct Dsu {
    parent: Vec<usize>,
    size: Vec<u64>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Merges and returns the number of newly connected pairs.
    fn union(&mut self, a: usize, b: usize) -> u64 {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return 0;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        let joined = self.size[ra] * self.size[rb];
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        joined
    }
}

/// Removes the listed nodes one at a time and records the residual
/// pairwise connectivity ratio after each removal.
///
/// Computed backwards with a union-find: start from the fully dismantled
/// graph and re-insert nodes in reverse order, so each step costs only the
/// re-inserted node's edges. All connectivity values are exact integers.
pub fn anc(g: &Graph, removal: &RemovalList) -> Result<AncCurve, DismantleError> {
    let n = g.node_count();
    let list = removal.nodes();
    if list.is_empty() {
        return Err(DismantleError::EmptyRemoval);
    }
    if let Some(&v) = list.iter().find(|&&v| v >= n) {
        return Err(DismantleError::NodeOutOfRange { node: v, n });
    }
    let mut active = vec![true; n];
    for &v in list {
        active[v] = false;
    }
    let mut dsu = Dsu::new(n);
    for (u, v) in g.edges() {
        if active[u] && active[v] {
            dsu.union(u, v);
        }
    }
    let roots: Vec<usize> = (0..n).filter(|&v| active[v] && dsu.find(v) == v).collect();
    let mut sigma: u64 = roots.iter().map(|&r| pairs(dsu.size[r])).sum();
    // sigma_after[k - 1] = connectivity once the first k nodes are gone
    let mut sigma_after = vec![0u64; list.len()];
    for k in (0..list.len()).rev() {
        sigma_after[k] = sigma;
        let v = list[k];
        active[v] = true;
        for &w in g.neighbors(v) {
            if active[w] {
                sigma += dsu.union(v, w);
            }
        }
    }
    let sigma0 = sigma;
    if sigma0 == 0 {
        return Err(DismantleError::Edgeless);
    }
    let ratios = sigma_after.iter().map(|&s| s as f64 / sigma0 as f64).collect();
    Ok(AncCurve {
        sigma0,
        ratios,
        node_count: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessMode {
    /// `1 - ANC` of the removal sequence.
    #[default]
    Anc,
    /// `1 - sigma(G \ removal) / sigma(G)`.
    Terminal,
}

/// Fitness of a scoring expression: score once, remove the top `L` nodes
/// in score order, and report `1 - ANC` (or the terminal residual).
pub fn fitness(g: &Graph, e: &ScoreExpr, fraction: f64, mode: FitnessMode) -> Result<f64, DismantleError> {
    let cache = MetricCache::new();
    fitness_with(
        &Evaluator::new(g, &cache),
        e,
        fraction,
        mode,
        AncNormalization::default(),
    )
}

pub fn fitness_with(
    evaluator: &Evaluator<'_>,
    e: &ScoreExpr,
    fraction: f64,
    mode: FitnessMode,
    norm: AncNormalization,
) -> Result<f64, DismantleError> {
    let (_, curve) = one_shot(evaluator, e, fraction)?;
    let c = match mode {
        FitnessMode::Anc => 1.0 - curve.value_with(norm),
        FitnessMode::Terminal => 1.0 - curve.terminal_ratio(),
    };
    Ok(c.clamp(0.0, 1.0))
}

/// Scores once with `e` and removes the top `L` nodes in order.
pub fn one_shot(
    evaluator: &Evaluator<'_>,
    e: &ScoreExpr,
    fraction: f64,
) -> Result<(RemovalList, AncCurve), DismantleError> {
    let g = evaluator.graph();
    if g.edge_count() == 0 {
        return Err(DismantleError::Edgeless);
    }
    let l = removal_count(fraction, g.node_count())?;
    let scores = evaluator.evaluate(e);
    let removal = top_l_by_score(&scores, l)?;
    let curve = anc(g, &removal)?;
    Ok((removal, curve))
}

/// Picks nodes one at a time on the shrinking graph.
pub trait Strategy {
    fn next_node(&mut self, g: &Graph, mask: &NodeMask) -> Result<usize, DismantleError>;
}

/// Repeatedly asks `strategy` for the next node until `L` nodes are gone.
pub fn dismantle_adaptive<S: Strategy + ?Sized>(
    g: &Graph,
    strategy: &mut S,
    fraction: f64,
) -> Result<RemovalList, DismantleError> {
    let l = removal_count(fraction, g.node_count())?;
    let mut mask = NodeMask::for_graph(g);
    let mut order = Vec::with_capacity(l);
    for _ in 0..l {
        let v = strategy.next_node(g, &mask)?;
        if !mask.remove(v) {
            return Err(DismantleError::Duplicate(v));
        }
        order.push(v);
    }
    Ok(RemovalList(order))
}

/// Residual connectivity computed from scratch, for cross-checking.
pub fn residual_connectivity(g: &Graph, removed: &[usize]) -> u64 {
    pairwise_connectivity(g, &NodeMask::from_removed(g.node_count(), removed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::graph::fixtures::*;

    fn list(nodes: &[usize], n: usize) -> RemovalList {
        RemovalList::new(nodes.to_vec(), n).unwrap()
    }

    #[test]
    fn top_l_examples() {
        assert_eq!(top_l_by_score(&[0.1, 0.9, 0.5], 2).unwrap().nodes(), &[1, 2]);
        assert_eq!(top_l_by_score(&[0.5, 0.5, 0.5], 2).unwrap().nodes(), &[0, 1]);
        assert_eq!(top_l_by_score(&[0.2, 0.3, 0.1], 3).unwrap().nodes(), &[1, 0, 2]);
        assert_eq!(top_l_by_score(&[0.0, -0.0], 1).unwrap().nodes(), &[0]);
        assert!(top_l_by_score(&[1.0], 0).is_err());
        assert!(top_l_by_score(&[1.0], 2).is_err());
    }

    #[test]
    fn anc_on_path() {
        let g = path(3);
        assert_eq!(anc(&g, &list(&[1], 3)).unwrap().value(), 0.0);
        let c = anc(&g, &list(&[0], 3)).unwrap();
        assert_eq!(c.ratios, vec![1.0 / 3.0]);
        let c = anc(&g, &list(&[0, 1], 3)).unwrap();
        assert_eq!(c.ratios, vec![1.0 / 3.0, 0.0]);
        assert!((c.value() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(c.sigma0, 3);
    }

    #[test]
    fn anc_errors() {
        let g = Graph::from_edges(3, &[]).unwrap();
        assert_eq!(anc(&g, &list(&[0], 3)), Err(DismantleError::Edgeless));
        assert_eq!(anc(&path(3), &list(&[], 3)), Err(DismantleError::EmptyRemoval));
        assert_eq!(RemovalList::new(vec![1, 1], 3), Err(DismantleError::Duplicate(1)));
    }

    #[test]
    fn node_count_normalization() {
        let c = anc(&path(4), &list(&[0], 4)).unwrap();
        assert_eq!(c.value(), 0.5);
        assert_eq!(c.value_with(AncNormalization::NodeCount), 0.125);
    }

    #[test]
    fn csv_export() {
        let c = anc(&path(3), &list(&[0, 1], 3)).unwrap();
        let csv = c.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("k,sigma_ratio"));
        assert_eq!(lines.next(), Some(format!("1,{}", 1.0 / 3.0).as_str()));
        assert_eq!(lines.next(), Some("2,0"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn removal_count_rounds_half_up_and_clamps() {
        assert_eq!(removal_count(0.2, 198).unwrap(), 40);
        assert_eq!(removal_count(0.2, 1000).unwrap(), 200);
        assert_eq!(removal_count(0.25, 10).unwrap(), 3);
        assert_eq!(removal_count(0.01, 10).unwrap(), 1);
        assert_eq!(removal_count(0.99, 10).unwrap(), 9);
        assert!(removal_count(1.5, 10).is_err());
        assert!(removal_count(0.0, 10).is_err());
    }

    #[test]
    fn fitness_on_star_and_k4() {
        let e = parse("degree").unwrap();
        assert_eq!(fitness(&star(5), &e, 0.2, FitnessMode::Anc).unwrap(), 1.0);
        for text in ["degree", "pagerank", "0"] {
            let e = parse(text).unwrap();
            assert_eq!(fitness(&complete(4), &e, 0.25, FitnessMode::Anc).unwrap(), 0.5);
            assert_eq!(fitness(&complete(4), &e, 0.25, FitnessMode::Terminal).unwrap(), 0.5);
        }
    }

    #[test]
    fn terminal_mode_uses_last_ratio() {
        // path of 5, remove nodes 1 then 3 (scores favour them)
        let e = parse("betweenness").unwrap();
        let g = path(5);
        let terminal = fitness(&g, &e, 0.4, FitnessMode::Terminal).unwrap();
        let anc_fit = fitness(&g, &e, 0.4, FitnessMode::Anc).unwrap();
        // remove center (2) first: sigma 10 -> 2; then 1 (tie with 3): -> 1
        assert_eq!(terminal, 1.0 - 1.0 / 10.0);
        assert_eq!(anc_fit, 1.0 - (0.2 + 0.1) / 2.0);
    }

    #[test]
    fn edgeless_graph_has_no_fitness() {
        let g = Graph::from_edges(4, &[]).unwrap();
        assert_eq!(
            fitness(&g, &parse("degree").unwrap(), 0.5, FitnessMode::Anc),
            Err(DismantleError::Edgeless)
        );
    }
}
