//! Crossover and mutation operators, plus the checks every offspring must
//! pass before it can join a population.
//!
//! Two operators implement [`VariationOperator`]: [`MockOperator`] edits
//! syntax trees directly and is fully deterministic in its seed, while
//! [`LlmOperator`] asks a chat-completion endpoint for new functions and
//! only lets parsed, validated expressions through.

mod llm;
mod mock;
mod prompt;

#[cfg(feature = "http")]
mod http;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{parse, ErrorKind, Evaluator, MetricCache, ScoreExpr};
use crate::graph::Graph;

#[cfg(feature = "http")]
pub use http::HttpChatClient;
pub use llm::{
    extract_code_blocks, ChatClient, ChatMessage, ChatRequest, LlmEndpointConfig, LlmOperator, SecretString,
    TransportError, API_KEY_ENV,
};
pub use mock::{mock_crossover, mock_mutate, MockOperator, MutationKind};
pub use prompt::{PromptTemplates, CROSSOVER_TEMPLATE, FORMAT_RULES, MUTATION_TEMPLATE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Llm,
    #[default]
    Mock,
}

impl std::str::FromStr for OperatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "llm" => Ok(OperatorKind::Llm),
            "mock" => Ok(OperatorKind::Mock),
            other => Err(format!("unknown operator `{other}` (expected llm or mock)")),
        }
    }
}

/// Why a candidate was turned away.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectReason {
    /// A completion contained no fenced code block.
    NoCodeBlock,
    Dsl {
        error: ErrorKind,
        message: String,
    },
    /// The probe-graph dry run produced a non-finite score.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub raw: String,
    pub reason: RejectReason,
}

/// Outcome of one crossover or mutation request.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VariationReport {
    pub requested: usize,
    pub parsed_ok: usize,
    pub discarded: Vec<Rejection>,
    pub accepted: Vec<ScoreExpr>,
    /// True when the mock operator stood in for a failed endpoint.
    pub fallback: bool,
}

impl VariationReport {
    pub(crate) fn accept(&mut self, e: ScoreExpr) {
        self.accepted.push(e);
        self.parsed_ok = self.accepted.len();
    }

    pub fn merge(&mut self, other: VariationReport) {
        self.requested += other.requested;
        self.discarded.extend(other.discarded);
        self.accepted.extend(other.accepted);
        self.parsed_ok = self.accepted.len();
        self.fallback |= other.fallback;
    }
}

#[derive(Debug, Error)]
pub enum VariationError {
    #[error("crossover needs at least 2 parents, got {0}")]
    TooFewParents(usize),
    #[error("endpoint failed after {attempts} attempt(s): {source}")]
    Transport {
        attempts: usize,
        #[source]
        source: TransportError,
    },
    #[error("template is missing placeholder {0}")]
    Template(&'static str),
}

/// A crossover/mutation mechanism. Implementations must be deterministic
/// in `seed` wherever the underlying source of offspring allows it.
pub trait VariationOperator: Send + Sync {
    fn crossover(&self, parents: &[(ScoreExpr, f64)], seed: u64) -> Result<VariationReport, VariationError>;

    /// The report holds at most one accepted expression.
    fn mutate(&self, e: &ScoreExpr, seed: u64) -> Result<VariationReport, VariationError>;

    /// Runs several crossover requests; results keep the order of `groups`.
    fn crossover_batch(
        &self,
        groups: &[Vec<(ScoreExpr, f64)>],
        seeds: &[u64],
    ) -> Vec<Result<VariationReport, VariationError>> {
        groups.iter().zip(seeds).map(|(g, &s)| self.crossover(g, s)).collect()
    }

    /// Mutates several expressions; results keep the input order.
    fn mutate_batch(&self, exprs: &[ScoreExpr], seeds: &[u64]) -> Vec<Result<VariationReport, VariationError>> {
        exprs.iter().zip(seeds).map(|(e, &s)| self.mutate(e, s)).collect()
    }
}

/// Fixed 10-node graph used to dry-run candidates. It mixes a triangle, a
/// square with a chord, a pendant path and a hub so that no metric is
/// constant on it.
pub fn probe_graph() -> &'static Graph {
    &probe().0
}

fn probe() -> &'static (Graph, MetricCache) {
    static PROBE: OnceLock<(Graph, MetricCache)> = OnceLock::new();
    PROBE.get_or_init(|| {
        let edges = [
            (0, 1),
            (0, 2),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 6),
            (6, 3),
            (3, 5),
            (6, 7),
            (7, 8),
            (3, 9),
        ];
        (
            Graph::from_edges(10, &edges).expect("valid probe graph"),
            MetricCache::new(),
        )
    })
}

/// Checks an already-built expression: bounds, then a probe-graph run.
pub fn validate_expr(e: &ScoreExpr) -> Result<(), RejectReason> {
    e.check_invariants().map_err(|err| RejectReason::Dsl {
        error: err.kind(),
        message: err.to_string(),
    })?;
    let (g, cache) = probe();
    let scores = Evaluator::new(g, cache).evaluate(e);
    if scores.iter().all(|s| s.is_finite()) {
        Ok(())
    } else {
        Err(RejectReason::NonFinite)
    }
}

/// Parses candidate text and runs [`validate_expr`] on it.
pub fn validate_offspring(raw: &str) -> Result<ScoreExpr, Rejection> {
    let reject = |reason| Rejection {
        raw: raw.to_string(),
        reason,
    };
    let e = parse(raw).map_err(|err| {
        reject(RejectReason::Dsl {
            error: err.kind(),
            message: err.to_string(),
        })
    })?;
    validate_expr(&e).map_err(reject)?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::degrees;
    use crate::graph::NodeMask;

    #[test]
    fn probe_graph_is_not_regular() {
        let g = probe_graph();
        assert_eq!(g.node_count(), 10);
        let d = degrees(g, &NodeMask::for_graph(g));
        assert!(d.iter().any(|&x| x != d[0]));
        assert_eq!(
            crate::graph::connected_components(g, &NodeMask::for_graph(g))
                .component_sizes
                .len(),
            1
        );
    }

    #[test]
    fn validate_examples() {
        assert_eq!(validate_offspring("degree").unwrap().to_string(), "degree");

        let big = vec!["degree"; 150].join(" + ");
        let r = validate_offspring(&big).unwrap_err();
        assert!(matches!(
            r.reason,
            RejectReason::Dsl {
                error: ErrorKind::SizeBound,
                ..
            }
        ));

        let r = validate_offspring("khop(9)").unwrap_err();
        assert!(matches!(
            r.reason,
            RejectReason::Dsl {
                error: ErrorKind::KhopRange,
                ..
            }
        ));

        let r = validate_offspring("degree ** 2").unwrap_err();
        assert!(matches!(
            r.reason,
            RejectReason::Dsl {
                error: ErrorKind::Syntax,
                ..
            }
        ));
        assert_eq!(r.raw, "degree ** 2");
    }

    #[test]
    fn constant_outputs_are_allowed() {
        assert!(validate_offspring("3").is_ok());
        assert!(validate_offspring("degree - degree").is_ok());
    }

    #[test]
    fn report_merge_keeps_counts_consistent() {
        let mut a = VariationReport {
            requested: 2,
            ..Default::default()
        };
        a.accept(parse("degree").unwrap());
        let mut b = VariationReport {
            requested: 2,
            ..Default::default()
        };
        b.accept(parse("pagerank").unwrap());
        b.discarded.push(Rejection {
            raw: "x".into(),
            reason: RejectReason::NoCodeBlock,
        });
        a.merge(b);
        assert_eq!((a.requested, a.parsed_ok, a.discarded.len()), (4, 2, 1));
    }
}
