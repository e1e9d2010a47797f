//! Deterministic structural embedding of an expression: node-kind counts
//! plus four shape features, L2-normalized.

use crate::dsl::{AggOp, BinaryOp, Metric, ScoreExpr, UnaryOp};

pub const EMBEDDING_DIM: usize = 24;

const UNARY_BASE: usize = 8;
const AGG_BASE: usize = 14;
const BINARY_BASE: usize = 17;
const SIZE: usize = 20;
const DEPTH: usize = 21;
const CONSTS: usize = 22;
const DISTINCT_METRICS: usize = 23;

fn metric_slot(m: Metric) -> usize {
    match m {
        // every khop(k) shares one slot
        Metric::Khop(_) => 7,
        other => other.slot(),
    }
}

fn unary_slot(op: UnaryOp) -> usize {
    UNARY_BASE + UnaryOp::ALL.iter().position(|&o| o == op).expect("listed")
}

fn agg_slot(op: AggOp) -> usize {
    AGG_BASE + AggOp::ALL.iter().position(|&o| o == op).expect("listed")
}

/// Binary operators collapse into additive, multiplicative and extremal
/// groups.
fn binary_slot(op: BinaryOp) -> usize {
    BINARY_BASE
        + match op {
            BinaryOp::Add | BinaryOp::Sub => 0,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Pow => 1,
            BinaryOp::Min | BinaryOp::Max => 2,
        }
}

pub fn embed(e: &ScoreExpr) -> Vec<f64> {
    let mut z = vec![0.0; EMBEDDING_DIM];
    for node in e.preorder() {
        match node {
            ScoreExpr::Const(_) => z[CONSTS] += 1.0,
            ScoreExpr::Metric(m) => z[metric_slot(*m)] += 1.0,
            ScoreExpr::Unary(op, _) => z[unary_slot(*op)] += 1.0,
            ScoreExpr::NeighborAgg(op, _) => z[agg_slot(*op)] += 1.0,
            ScoreExpr::Binary(op, _, _) => z[binary_slot(*op)] += 1.0,
        }
    }
    z[SIZE] = e.size() as f64;
    z[DEPTH] = e.depth() as f64;
    z[DISTINCT_METRICS] = e.metrics().len() as f64;
    let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    z.iter_mut().for_each(|x| *x /= norm);
    z
}
