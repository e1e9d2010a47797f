//! Evolutionary discovery of node-scoring functions for network
//! dismantling.
//!
//! Individuals are programs in a small scoring language ([`dsl`]). A
//! program scores every node of a [`graph::Graph`]; removing the top-scored
//! fraction of nodes and measuring the accumulated normalized connectivity
//! ([`dismantle`]) gives its fitness. [`engine::run`] evolves a set of
//! similarity-grouped populations ([`population`]) with crossover and
//! mutation supplied by a chat-completion model or a deterministic
//! AST operator ([`variation`]). [`baselines`] holds the classical
//! adaptive heuristics used for comparison.

pub mod baselines;
pub mod dismantle;
pub mod dsl;
pub mod engine;
pub mod graph;
pub mod numeric;
pub mod population;
pub mod seed;
pub mod variation;
