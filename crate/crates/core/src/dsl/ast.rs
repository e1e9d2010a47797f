use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::DslError;

pub const MAX_SIZE: usize = 200;
pub const MAX_DEPTH: usize = 12;
pub const MAX_EXPONENT: f64 = 4.0;
pub const MAX_KHOP: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Degree,
    Coreness,
    Betweenness,
    Closeness,
    PageRank,
    Eigenvector,
    Clustering,
    Khop(u8),
}

impl Metric {
    /// The plain (argument-free) metrics.
    pub const SIMPLE: [Metric; 7] = [
        Metric::Degree,
        Metric::Coreness,
        Metric::Betweenness,
        Metric::Closeness,
        Metric::PageRank,
        Metric::Eigenvector,
        Metric::Clustering,
    ];

    /// Every metric, including each admissible `khop(k)`.
    pub fn all() -> impl Iterator<Item = Metric> {
        Self::SIMPLE.into_iter().chain((1..=MAX_KHOP).map(Metric::Khop))
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Degree => "degree",
            Metric::Coreness => "coreness",
            Metric::Betweenness => "betweenness",
            Metric::Closeness => "closeness",
            Metric::PageRank => "pagerank",
            Metric::Eigenvector => "eigenvector",
            Metric::Clustering => "clustering",
            Metric::Khop(_) => "khop",
        }
    }

    pub fn from_name(name: &str) -> Option<Metric> {
        Self::SIMPLE.into_iter().find(|m| m.name() == name)
    }

    /// Dense slot index, used by the metric cache and the embedding.
    pub fn slot(self) -> usize {
        match self {
            Metric::Degree => 0,
            Metric::Coreness => 1,
            Metric::Betweenness => 2,
            Metric::Closeness => 3,
            Metric::PageRank => 4,
            Metric::Eigenvector => 5,
            Metric::Clustering => 6,
            Metric::Khop(k) => 6 + k as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Abs,
    Sqrt,
    Log1p,
    Normalize,
    Rank,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 6] = [
        UnaryOp::Neg,
        UnaryOp::Abs,
        UnaryOp::Sqrt,
        UnaryOp::Log1p,
        UnaryOp::Normalize,
        UnaryOp::Rank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Abs => "abs",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Log1p => "log1p",
            UnaryOp::Normalize => "normalize",
            UnaryOp::Rank => "rank",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggOp {
    NSum,
    NMean,
    NMax,
}

impl AggOp {
    pub const ALL: [AggOp; 3] = [AggOp::NSum, AggOp::NMean, AggOp::NMax];

    pub fn name(self) -> &'static str {
        match self {
            AggOp::NSum => "nsum",
            AggOp::NMean => "nmean",
            AggOp::NMax => "nmax",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
    Pow,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 7] = [
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::Min,
        BinaryOp::Max,
        BinaryOp::Pow,
    ];

    pub fn symbol(self) -> Option<char> {
        match self {
            BinaryOp::Add => Some('+'),
            BinaryOp::Sub => Some('-'),
            BinaryOp::Mul => Some('*'),
            BinaryOp::Div => Some('/'),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
            BinaryOp::Div => "div",
            BinaryOp::Min => "min",
            BinaryOp::Max => "max",
            BinaryOp::Pow => "pow",
        }
    }
}

/// A node-scoring program.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreExpr {
    Const(f64),
    Metric(Metric),
    Unary(UnaryOp, Box<ScoreExpr>),
    NeighborAgg(AggOp, Box<ScoreExpr>),
    Binary(BinaryOp, Box<ScoreExpr>, Box<ScoreExpr>),
}

impl ScoreExpr {
    pub fn constant(c: f64) -> Self {
        ScoreExpr::Const(c)
    }

    pub fn metric(m: Metric) -> Self {
        ScoreExpr::Metric(m)
    }

    pub fn unary(op: UnaryOp, child: ScoreExpr) -> Self {
        ScoreExpr::Unary(op, Box::new(child))
    }

    pub fn agg(op: AggOp, child: ScoreExpr) -> Self {
        ScoreExpr::NeighborAgg(op, Box::new(child))
    }

    pub fn binary(op: BinaryOp, left: ScoreExpr, right: ScoreExpr) -> Self {
        ScoreExpr::Binary(op, Box::new(left), Box::new(right))
    }

    pub fn children(&self) -> Vec<&ScoreExpr> {
        match self {
            ScoreExpr::Const(_) | ScoreExpr::Metric(_) => vec![],
            ScoreExpr::Unary(_, c) | ScoreExpr::NeighborAgg(_, c) => vec![c],
            ScoreExpr::Binary(_, l, r) => vec![l, r],
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// A single leaf has depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Pre-order traversal.
    pub fn preorder(&self) -> Vec<&ScoreExpr> {
        let mut out = Vec::with_capacity(16);
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            out.push(e);
            let children = e.children();
            stack.extend(children.into_iter().rev());
        }
        out
    }

    /// The subtree at pre-order position `index`.
    pub fn subtree(&self, index: usize) -> Option<&ScoreExpr> {
        self.preorder().get(index).copied()
    }

    /// Returns a copy with the subtree at pre-order `index` replaced.
    pub fn with_subtree(&self, index: usize, replacement: &ScoreExpr) -> Option<ScoreExpr> {
        let mut out = self.clone();
        let slot = out.subtree_mut(index)?;
        *slot = replacement.clone();
        Some(out)
    }

    pub fn subtree_mut(&mut self, index: usize) -> Option<&mut ScoreExpr> {
        fn walk<'a>(e: &'a mut ScoreExpr, index: &mut usize) -> Option<&'a mut ScoreExpr> {
            if *index == 0 {
                return Some(e);
            }
            *index -= 1;
            match e {
                ScoreExpr::Const(_) | ScoreExpr::Metric(_) => None,
                ScoreExpr::Unary(_, c) | ScoreExpr::NeighborAgg(_, c) => walk(c, index),
                ScoreExpr::Binary(_, l, r) => {
                    let left_size = l.size();
                    if *index < left_size {
                        walk(l, index)
                    } else {
                        *index -= left_size;
                        walk(r, index)
                    }
                }
            }
        }
        let mut i = index;
        walk(self, &mut i)
    }

    /// Checks the size, depth, exponent and khop bounds.
    pub fn check_invariants(&self) -> Result<(), DslError> {
        let size = self.size();
        if size > MAX_SIZE {
            return Err(DslError::TooLarge { size });
        }
        let depth = self.depth();
        if depth > MAX_DEPTH {
            return Err(DslError::TooDeep { depth });
        }
        for node in self.preorder() {
            match node {
                ScoreExpr::Metric(Metric::Khop(k)) if !(1..=MAX_KHOP).contains(k) => {
                    return Err(DslError::KhopRange { found: k.to_string() });
                }
                ScoreExpr::Binary(BinaryOp::Pow, _, exp) => match **exp {
                    ScoreExpr::Const(c) if (-MAX_EXPONENT..=MAX_EXPONENT).contains(&c) => {}
                    ScoreExpr::Const(c) => return Err(DslError::ExponentOutOfRange { value: c }),
                    _ => return Err(DslError::NonConstantExponent),
                },
                _ => {}
            }
        }
        Ok(())
    }

    pub fn metrics(&self) -> Vec<Metric> {
        let mut out: Vec<Metric> = self
            .preorder()
            .into_iter()
            .filter_map(|e| match e {
                ScoreExpr::Metric(m) => Some(*m),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn write_into(&self, f: &mut fmt::Formatter<'_>, top: bool) -> fmt::Result {
        match self {
            ScoreExpr::Const(c) => write!(f, "{c}"),
            ScoreExpr::Metric(Metric::Khop(k)) => write!(f, "khop({k})"),
            ScoreExpr::Metric(m) => f.write_str(m.name()),
            ScoreExpr::Unary(op, c) => {
                write!(f, "{}(", op.name())?;
                c.write_into(f, true)?;
                f.write_str(")")
            }
            ScoreExpr::NeighborAgg(op, c) => {
                write!(f, "{}(", op.name())?;
                c.write_into(f, true)?;
                f.write_str(")")
            }
            ScoreExpr::Binary(op, l, r) => match op.symbol() {
                Some(sym) => {
                    if !top {
                        f.write_str("(")?;
                    }
                    l.write_into(f, false)?;
                    write!(f, " {sym} ")?;
                    r.write_into(f, false)?;
                    if !top {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
                None => {
                    write!(f, "{}(", op.name())?;
                    l.write_into(f, true)?;
                    f.write_str(", ")?;
                    r.write_into(f, true)?;
                    f.write_str(")")
                }
            },
        }
    }
}

/// Canonical text: infix arithmetic is fully parenthesized below the top
/// level, everything else uses call syntax.
impl fmt::Display for ScoreExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_into(f, true)
    }
}

impl FromStr for ScoreExpr {
    type Err = DslError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        super::parse(s)
    }
}

impl Serialize for ScoreExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScoreExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_depth_and_subtrees() {
        let e: ScoreExpr = "normalize(degree) + 0.5 * pagerank".parse().unwrap();
        assert_eq!(e.size(), 6);
        assert_eq!(e.depth(), 3);
        assert_eq!(e.subtree(1).unwrap().to_string(), "normalize(degree)");
        assert_eq!(e.subtree(3).unwrap().to_string(), "0.5 * pagerank");
        let swapped = e.with_subtree(2, &ScoreExpr::Metric(Metric::Khop(3))).unwrap();
        assert_eq!(swapped.to_string(), "normalize(khop(3)) + (0.5 * pagerank)");
        assert!(e.subtree(6).is_none());
    }

    #[test]
    fn canonical_text() {
        assert_eq!(ScoreExpr::Metric(Metric::Degree).to_string(), "degree");
        let e: ScoreExpr = "(degree - 1) * nsum(degree - 1)".parse().unwrap();
        assert_eq!(e.to_string(), "(degree - 1) * nsum(degree - 1)");
        assert_eq!(ScoreExpr::Const(-0.25).to_string(), "-0.25");
        let e: ScoreExpr = "-degree + pow(closeness, -2)".parse().unwrap();
        assert_eq!(e.to_string(), "neg(degree) + pow(closeness, -2)");
    }

    #[test]
    fn metric_slots_are_dense() {
        let slots: Vec<_> = Metric::all().map(Metric::slot).collect();
        assert_eq!(slots, (0..11).collect::<Vec<_>>());
    }

    #[test]
    fn serde_uses_canonical_text() {
        let e: ScoreExpr = "max(degree, 2)".parse().unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, "\"max(degree, 2)\"");
        let back: ScoreExpr = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }
}
