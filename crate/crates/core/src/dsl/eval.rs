//! Vector semantics. Every operator is total: division by zero, roots and
//! logs of negatives, and any non-finite intermediate all evaluate to 0, so
//! a parsed expression can never fail at run time.

use std::ops::Deref;
use std::sync::OnceLock;

use serde::Serialize;

use super::ast::{AggOp, BinaryOp, Metric, ScoreExpr, UnaryOp};
use crate::graph::{self, Graph, NodeMask, PageRankParams};
use crate::numeric::exact_sum;

/// One score per node index; every entry finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ScoreVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ScoreVector {
    fn from(v: Vec<f64>) -> Self {
        ScoreVector(v)
    }
}

const SLOTS: usize = 11;

/// Lazily computed metric vectors for one graph. Safe to share between
/// threads; each slot is computed at most once.
#[derive(Debug, Default)]
pub struct MetricCache {
    slots: [OnceLock<Vec<f64>>; SLOTS],
}

impl MetricCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, g: &Graph, m: Metric) -> &[f64] {
        self.slots[m.slot()].get_or_init(|| compute_metric(g, m))
    }
}

pub fn compute_metric(g: &Graph, m: Metric) -> Vec<f64> {
    let as_f64 = |v: Vec<usize>| v.into_iter().map(|x| x as f64).collect();
    match m {
        Metric::Degree => as_f64(graph::degrees(g, &NodeMask::for_graph(g))),
        Metric::Coreness => as_f64(graph::core_decomposition(g)),
        Metric::Betweenness => graph::betweenness(g),
        Metric::Closeness => graph::harmonic_closeness(g),
        Metric::PageRank => graph::pagerank(g, PageRankParams::default()),
        Metric::Eigenvector => {
            graph::eigenvector_centrality(g, graph::DEFAULT_EIGEN_TOL, graph::DEFAULT_EIGEN_MAX_ITER)
        }
        Metric::Clustering => graph::clustering_coefficients(g),
        Metric::Khop(k) => as_f64(graph::khop_counts(g, k as usize)),
    }
}

/// Evaluates expressions against one graph, optionally through a shared
/// metric cache.
pub struct Evaluator<'g> {
    graph: &'g Graph,
    cache: Option<&'g MetricCache>,
}

impl<'g> Evaluator<'g> {
    pub fn new(graph: &'g Graph, cache: &'g MetricCache) -> Self {
        Self {
            graph,
            cache: Some(cache),
        }
    }

    /// Recomputes every metric on each use.
    pub fn uncached(graph: &'g Graph) -> Self {
        Self { graph, cache: None }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn evaluate(&self, e: &ScoreExpr) -> ScoreVector {
        ScoreVector(self.eval(e))
    }

    fn eval(&self, e: &ScoreExpr) -> Vec<f64> {
        let n = self.graph.node_count();
        match e {
            ScoreExpr::Const(c) => vec![finite(*c); n],
            ScoreExpr::Metric(m) => match self.cache {
                Some(cache) => cache.get(self.graph, *m).to_vec(),
                None => compute_metric(self.graph, *m),
            },
            ScoreExpr::Unary(op, child) => unary(*op, self.eval(child)),
            ScoreExpr::NeighborAgg(op, child) => {
                let values = self.eval(child);
                aggregate(self.graph, *op, &values)
            }
            ScoreExpr::Binary(op, l, r) => {
                let left = self.eval(l);
                let right = self.eval(r);
                left.into_iter()
                    .zip(right)
                    .map(|(a, b)| finite(binary(*op, a, b)))
                    .collect()
            }
        }
    }
}

pub fn evaluate(e: &ScoreExpr, g: &Graph) -> ScoreVector {
    let cache = MetricCache::new();
    Evaluator::new(g, &cache).evaluate(e)
}

#[inline]
fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

fn binary(op: BinaryOp, a: f64, b: f64) -> f64 {
    match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => {
            if b == 0.0 {
                0.0
            } else {
                a / b
            }
        }
        BinaryOp::Min => a.min(b),
        BinaryOp::Max => a.max(b),
        BinaryOp::Pow => {
            if b.fract() == 0.0 {
                a.powi(b as i32)
            } else {
                a.abs().powf(b) * sign(a)
            }
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn unary(op: UnaryOp, mut v: Vec<f64>) -> Vec<f64> {
    match op {
        UnaryOp::Neg => v.iter_mut().for_each(|x| *x = -*x),
        UnaryOp::Abs => v.iter_mut().for_each(|x| *x = x.abs()),
        UnaryOp::Sqrt => v.iter_mut().for_each(|x| *x = if *x < 0.0 { 0.0 } else { x.sqrt() }),
        UnaryOp::Log1p => v
            .iter_mut()
            .for_each(|x| *x = if *x < 0.0 { 0.0 } else { finite(x.ln_1p()) }),
        UnaryOp::Normalize => normalize(&mut v),
        UnaryOp::Rank => return rank(&v),
    }
    v
}

/// Min-max scaling to `[0, 1]`; a constant vector maps to zeros.
fn normalize(v: &mut [f64]) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if v.is_empty() || hi == lo {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let span = hi - lo;
    if span.is_finite() {
        v.iter_mut().for_each(|x| *x = (*x - lo) / span);
    } else {
        let half_span = hi / 2.0 - lo / 2.0;
        v.iter_mut().for_each(|x| *x = (*x / 2.0 - lo / 2.0) / half_span);
    }
}

/// Ascending average rank (0-based) scaled by `max(V - 1, 1)`.
fn rank(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let scale = (n.saturating_sub(1)).max(1) as f64;
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && v[order[j]] == v[order[i]] {
            j += 1;
        }
        let avg = (i + j - 1) as f64 / 2.0;
        for &idx in &order[i..j] {
            out[idx] = avg / scale;
        }
        i = j;
    }
    out
}

fn aggregate(g: &Graph, op: AggOp, values: &[f64]) -> Vec<f64> {
    (0..g.node_count())
        .map(|v| {
            let nbrs = g.neighbors(v);
            if nbrs.is_empty() {
                return 0.0;
            }
            let x = match op {
                AggOp::NSum => exact_sum(nbrs.iter().map(|&u| values[u])),
                AggOp::NMean => exact_sum(nbrs.iter().map(|&u| values[u])) / nbrs.len() as f64,
                AggOp::NMax => nbrs.iter().map(|&u| values[u]).fold(f64::NEG_INFINITY, f64::max),
            };
            finite(x)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::graph::fixtures::*;

    fn eval(text: &str, g: &Graph) -> Vec<f64> {
        evaluate(&parse(text).unwrap(), g).into_inner()
    }

    #[test]
    fn metric_and_normalize_on_path() {
        assert_eq!(eval("degree", &path(3)), vec![1.0, 2.0, 1.0]);
        assert_eq!(eval("normalize(degree)", &path(3)), vec![0.0, 1.0, 0.0]);
        assert_eq!(eval("normalize(degree)", &complete(4)), vec![0.0; 4]);
    }

    #[test]
    fn neighbor_aggregates_on_star() {
        assert_eq!(eval("nsum(degree)", &star(5)), vec![4.0; 5]);
        assert_eq!(eval("nmean(degree)", &star(5)), vec![1.0, 4.0, 4.0, 4.0, 4.0]);
        assert_eq!(eval("nmax(neg(degree))", &star(5)), vec![-1.0, -4.0, -4.0, -4.0, -4.0]);
        let isolated = Graph::from_edges(2, &[]).unwrap();
        assert_eq!(eval("nmean(degree) + nmax(degree)", &isolated), vec![0.0, 0.0]);
    }

    #[test]
    fn totality() {
        assert_eq!(eval("degree / (degree - degree)", &path(4)), vec![0.0; 4]);
        assert_eq!(eval("sqrt(neg(degree))", &path(3)), vec![0.0; 3]);
        assert_eq!(eval("log1p(-0.5)", &path(2)), vec![0.0; 2]);
        assert_eq!(eval("pow(degree - 1, -2)", &path(3)), vec![0.0, 1.0, 0.0]);
        assert_eq!(eval("1e308 * 1e308", &path(2)), vec![0.0; 2]);
        assert_eq!(
            eval("normalize(1.7e308 * (degree - 1.5) * 2)", &path(3)),
            vec![0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn pow_preserves_sign_for_fractional_exponents() {
        let v = eval("pow(degree - 2, 0.5)", &path(3));
        assert_eq!(v, vec![-1.0, 0.0, -1.0]);
        assert_eq!(eval("pow(0 - degree, 3)", &path(3)), vec![-1.0, -8.0, -1.0]);
    }

    #[test]
    fn rank_averages_ties() {
        assert_eq!(eval("rank(degree)", &path(3)), vec![0.25, 1.0, 0.25]);
        assert_eq!(eval("rank(degree)", &Graph::from_edges(1, &[]).unwrap()), vec![0.0]);
        assert_eq!(eval("rank(degree)", &path(2)), vec![0.5, 0.5]);
    }

    #[test]
    fn cached_and_uncached_agree() {
        let g = crate::graph::generate_ba(40, 2, 3).unwrap();
        let e = parse("normalize(betweenness) + pagerank * nsum(khop(2)) - eigenvector").unwrap();
        let cache = MetricCache::new();
        let cached = Evaluator::new(&g, &cache);
        let a = cached.evaluate(&e);
        let b = cached.evaluate(&e);
        let c = Evaluator::uncached(&g).evaluate(&e);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
