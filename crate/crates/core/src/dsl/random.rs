use rand::Rng;

use super::ast::{AggOp, BinaryOp, Metric, ScoreExpr, UnaryOp, MAX_DEPTH, MAX_SIZE};
use crate::seed::{self, SeededRng};

/// Grow-method random tree, deterministic in `seed`. Depth is clamped to
/// `1..=12` and size to the global node bound, so the result always
/// satisfies [`ScoreExpr::check_invariants`].
pub fn random_expr(seed: u64, max_depth: usize) -> ScoreExpr {
    let mut rng = seed::rng(seed);
    random_expr_with(&mut rng, max_depth, MAX_SIZE)
}

pub(crate) fn random_expr_with(rng: &mut SeededRng, max_depth: usize, max_size: usize) -> ScoreExpr {
    grow(rng, max_depth.clamp(1, MAX_DEPTH), max_size.max(1))
}

pub(crate) fn random_metric(rng: &mut SeededRng) -> Metric {
    let all: Vec<Metric> = Metric::all().collect();
    // plain metrics are more common than the four khop variants together
    if rng.random_bool(0.8) {
        Metric::SIMPLE[rng.random_range(0..Metric::SIMPLE.len())]
    } else {
        all[Metric::SIMPLE.len() + rng.random_range(0..4)]
    }
}

pub(crate) fn random_const(rng: &mut SeededRng) -> f64 {
    const NICE: [f64; 8] = [0.001, 0.1, 0.5, 1.0, 2.0, 3.0, 10.0, -1.0];
    if rng.random_bool(0.5) {
        NICE[rng.random_range(0..NICE.len())]
    } else {
        (rng.random_range(-2.0..2.0f64) * 100.0).round() / 100.0
    }
}

pub(crate) fn random_exponent(rng: &mut SeededRng) -> f64 {
    const EXPONENTS: [f64; 8] = [-2.0, -1.0, -0.5, 0.5, 1.5, 2.0, 3.0, 4.0];
    EXPONENTS[rng.random_range(0..EXPONENTS.len())]
}

fn leaf(rng: &mut SeededRng) -> ScoreExpr {
    if rng.random_bool(0.75) {
        ScoreExpr::Metric(random_metric(rng))
    } else {
        ScoreExpr::Const(random_const(rng))
    }
}

/// `budget` bounds the size of the returned subtree.
fn grow(rng: &mut SeededRng, depth_left: usize, budget: usize) -> ScoreExpr {
    if depth_left <= 1 || budget < 2 || rng.random_bool(0.3) {
        return leaf(rng);
    }
    let roll = rng.random_range(0..10);
    if roll < 5 && budget >= 3 {
        let op = BinaryOp::ALL[rng.random_range(0..BinaryOp::ALL.len())];
        let left = grow(rng, depth_left - 1, budget - 2);
        let right = if op == BinaryOp::Pow {
            ScoreExpr::Const(random_exponent(rng))
        } else {
            grow(rng, depth_left - 1, budget - 1 - left.size())
        };
        ScoreExpr::binary(op, left, right)
    } else if roll < 8 {
        let op = UnaryOp::ALL[rng.random_range(0..UnaryOp::ALL.len())];
        ScoreExpr::unary(op, grow(rng, depth_left - 1, budget - 1))
    } else {
        let op = AggOp::ALL[rng.random_range(0..AggOp::ALL.len())];
        ScoreExpr::agg(op, grow(rng, depth_left - 1, budget - 1))
    }
}
