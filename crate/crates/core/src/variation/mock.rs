use rand::Rng;
use serde::Serialize;

use crate::dsl::random::{random_const, random_metric};
use crate::dsl::{BinaryOp, Metric, ScoreExpr, UnaryOp};
use crate::seed::{self, SeededRng};

use super::{validate_expr, Rejection, VariationError, VariationOperator, VariationReport};

const EXCHANGE_ATTEMPTS: usize = 5;
const MUTATION_ATTEMPTS: usize = 5;

/// Deterministic tree-editing operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MockOperator {
    /// Offspring per adjacent parent pair.
    pub max_offspring: usize,
}

impl Default for MockOperator {
    fn default() -> Self {
        Self { max_offspring: 2 }
    }
}

impl VariationOperator for MockOperator {
    fn crossover(&self, parents: &[(ScoreExpr, f64)], seed: u64) -> Result<VariationReport, VariationError> {
        if parents.len() < 2 {
            return Err(VariationError::TooFewParents(parents.len()));
        }
        let exprs: Vec<ScoreExpr> = parents.iter().map(|(e, _)| e.clone()).collect();
        let mut report = VariationReport::default();
        for (i, pair) in exprs.windows(2).enumerate() {
            let mut rng = seed::rng_for(seed, &[i as u64]);
            report.requested += self.max_offspring;
            for child in pair_offspring(&mut rng, &pair[0], &pair[1])
                .into_iter()
                .take(self.max_offspring)
            {
                match validate_expr(&child) {
                    Ok(()) => report.accept(child),
                    Err(reason) => report.discarded.push(Rejection {
                        raw: child.to_string(),
                        reason,
                    }),
                }
            }
        }
        Ok(report)
    }

    fn mutate(&self, e: &ScoreExpr, seed: u64) -> Result<VariationReport, VariationError> {
        let mut report = VariationReport {
            requested: 1,
            ..Default::default()
        };
        if let Some(m) = mock_mutate(e, seed) {
            report.accept(m);
        }
        Ok(report)
    }
}

/// Offspring of every adjacent pair, in pair order, before validation.
pub fn mock_crossover(parents: &[ScoreExpr], seed: u64) -> Vec<ScoreExpr> {
    parents
        .windows(2)
        .enumerate()
        .flat_map(|(i, pair)| {
            let mut rng = seed::rng_for(seed, &[i as u64]);
            pair_offspring(&mut rng, &pair[0], &pair[1])
        })
        .collect()
}

fn pair_offspring(rng: &mut SeededRng, a: &ScoreExpr, b: &ScoreExpr) -> Vec<ScoreExpr> {
    let mut out = Vec::with_capacity(2);
    if let Some(child) = subtree_exchange(rng, a, b) {
        out.push(child);
    }
    let blend = ScoreExpr::binary(
        BinaryOp::Add,
        ScoreExpr::unary(UnaryOp::Normalize, a.clone()),
        ScoreExpr::unary(UnaryOp::Normalize, b.clone()),
    );
    if blend.check_invariants().is_ok() {
        out.push(blend);
    }
    out
}

/// Grafts a subtree of `b` into `a`. Both cut points come from one uniform
/// draw scaled to each tree's size, so identical parents give back the
/// parent unchanged.
fn subtree_exchange(rng: &mut SeededRng, a: &ScoreExpr, b: &ScoreExpr) -> Option<ScoreExpr> {
    let (na, nb) = (a.size(), b.size());
    for _ in 0..EXCHANGE_ATTEMPTS {
        let u: f64 = rng.random();
        let i = ((u * na as f64) as usize).min(na - 1);
        let j = ((u * nb as f64) as usize).min(nb - 1);
        let donor = b.subtree(j)?;
        let child = a.with_subtree(i, donor)?;
        if child.check_invariants().is_ok() {
            return Some(child);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    ReplaceMetric,
    PerturbConst,
    WrapUnary,
    UnwrapUnary,
    SwapBinary,
}

impl MutationKind {
    pub const ALL: [MutationKind; 5] = [
        MutationKind::ReplaceMetric,
        MutationKind::PerturbConst,
        MutationKind::WrapUnary,
        MutationKind::UnwrapUnary,
        MutationKind::SwapBinary,
    ];
}

/// One seeded point edit, drawn among the kinds that apply to `e`. Edits
/// that break the bounds are redrawn, up to five attempts.
pub fn mock_mutate(e: &ScoreExpr, seed: u64) -> Option<ScoreExpr> {
    let mut rng = seed::rng(seed);
    let nodes = e.preorder();
    let has = |f: fn(&ScoreExpr) -> bool| nodes.iter().any(|n| f(n));
    let kinds: Vec<MutationKind> = MutationKind::ALL
        .into_iter()
        .filter(|k| match k {
            MutationKind::ReplaceMetric => has(|n| matches!(n, ScoreExpr::Metric(_))),
            MutationKind::PerturbConst => has(|n| matches!(n, ScoreExpr::Const(_))),
            MutationKind::WrapUnary => true,
            MutationKind::UnwrapUnary => has(|n| matches!(n, ScoreExpr::Unary(..))),
            MutationKind::SwapBinary => has(|n| matches!(n, ScoreExpr::Binary(..))),
        })
        .collect();
    for _ in 0..MUTATION_ATTEMPTS {
        let kind = kinds[rng.random_range(0..kinds.len())];
        if let Some(m) = apply(&mut rng, e, kind) {
            if validate_expr(&m).is_ok() {
                return Some(m);
            }
        }
    }
    None
}

fn positions(e: &ScoreExpr, pred: impl Fn(&ScoreExpr) -> bool) -> Vec<usize> {
    e.preorder()
        .into_iter()
        .enumerate()
        .filter(|(_, n)| pred(n))
        .map(|(i, _)| i)
        .collect()
}

fn pick(rng: &mut SeededRng, v: &[usize]) -> Option<usize> {
    (!v.is_empty()).then(|| v[rng.random_range(0..v.len())])
}

fn apply(rng: &mut SeededRng, e: &ScoreExpr, kind: MutationKind) -> Option<ScoreExpr> {
    let mut out = e.clone();
    match kind {
        MutationKind::ReplaceMetric => {
            let at = pick(rng, &positions(e, |n| matches!(n, ScoreExpr::Metric(_))))?;
            let ScoreExpr::Metric(old) = *e.subtree(at)? else {
                return None;
            };
            let new = other_metric(rng, old);
            *out.subtree_mut(at)? = ScoreExpr::Metric(new);
        }
        MutationKind::PerturbConst => {
            let at = pick(rng, &positions(e, |n| matches!(n, ScoreExpr::Const(_))))?;
            let ScoreExpr::Const(c) = *e.subtree(at)? else {
                return None;
            };
            let factor = rng.random_range(0.5..=2.0f64);
            let c = if c == 0.0 {
                random_const(rng)
            } else {
                round_sig(c * factor)
            };
            *out.subtree_mut(at)? = ScoreExpr::Const(c);
        }
        MutationKind::WrapUnary => {
            let at = rng.random_range(0..e.size());
            let op = UnaryOp::ALL[rng.random_range(0..UnaryOp::ALL.len())];
            let slot = out.subtree_mut(at)?;
            let inner = std::mem::replace(slot, ScoreExpr::Const(0.0));
            *slot = ScoreExpr::unary(op, inner);
        }
        MutationKind::UnwrapUnary => {
            let at = pick(rng, &positions(e, |n| matches!(n, ScoreExpr::Unary(..))))?;
            let slot = out.subtree_mut(at)?;
            let ScoreExpr::Unary(_, inner) = std::mem::replace(slot, ScoreExpr::Const(0.0)) else {
                return None;
            };
            *slot = *inner;
        }
        MutationKind::SwapBinary => {
            let at = pick(rng, &positions(e, |n| matches!(n, ScoreExpr::Binary(..))))?;
            let ScoreExpr::Binary(op, ..) = out.subtree_mut(at)? else {
                return None;
            };
            let others: Vec<BinaryOp> = BinaryOp::ALL.into_iter().filter(|o| o != op).collect();
            *op = others[rng.random_range(0..others.len())];
        }
    }
    Some(out)
}

fn other_metric(rng: &mut SeededRng, old: Metric) -> Metric {
    loop {
        let m = random_metric(rng);
        if m != old {
            return m;
        }
    }
}

/// Four significant digits keep evolved constants readable.
fn round_sig(x: f64) -> f64 {
    format!("{x:.3e}").parse().unwrap_or(x)
}
