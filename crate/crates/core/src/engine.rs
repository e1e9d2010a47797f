//! The evolution loop: evaluate, classify, select, cross over, mutate.
//!
//! Epoch 0 evaluates the initial functions, each of which founds its own
//! population. Every later epoch selects parents from the populations,
//! produces offspring through the variation operator, mutates a share of
//! them, then evaluates and classifies the resulting round before the next
//! epoch starts. Populations persist across epochs; each round is
//! evaluated exactly once.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dismantle::{fitness_with, AncNormalization, DismantleError, FitnessMode};
use crate::dsl::{random_expr, Evaluator, MetricCache, ScoreExpr};
use crate::graph::Graph;
use crate::population::{
    initial_functions, select_parents_with, Individual, Origin, Placement, PopulationConfig, PopulationError,
    PopulationSet,
};
use crate::seed::{self, Purpose};
use crate::variation::{OperatorKind, Rejection, VariationError, VariationOperator};

/// Parents drawn per round when population management is switched off.
const POOL_PARENTS: usize = 12;
/// Depth bound for random initial functions.
const RANDOM_INIT_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ablation {
    /// Start from random expressions instead of the hand-written set.
    pub no_manual_init: bool,
    /// One unbounded pool, uniform parent draws, no classification.
    pub no_population_mgmt: bool,
    /// Every function is a parent; one round of variation, then stop.
    pub single_epoch: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub epochs: usize,
    pub mutation_rate: f64,
    pub similarity_threshold: f64,
    pub population_capacity: usize,
    /// Upper bound on the number of populations; `None` for unbounded.
    pub max_populations: Option<usize>,
    pub removal_fraction: f64,
    pub fitness_mode: FitnessMode,
    pub anc_normalization: AncNormalization,
    pub operator: OperatorKind,
    pub master_seed: u64,
    pub ablation: Ablation,
    /// Same-population parent pairs drawn per epoch.
    pub inter_pairs: usize,
    /// Offspring kept per crossover request (per adjacent pair in mock mode).
    pub max_offspring: usize,
    /// Fresh parent draws allowed when a round yields no offspring.
    pub round_retries: usize,
    /// Wall-clock budget in seconds; checked between epochs.
    pub budget_secs: Option<f64>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            mutation_rate: 0.3,
            similarity_threshold: 0.93,
            population_capacity: 10,
            max_populations: Some(32),
            removal_fraction: 0.2,
            fitness_mode: FitnessMode::Anc,
            anc_normalization: AncNormalization::RemovalLength,
            operator: OperatorKind::Mock,
            master_seed: 0,
            ablation: Ablation::default(),
            inter_pairs: 1,
            max_offspring: 2,
            round_retries: 3,
            budget_secs: None,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidConfig(m));
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad(format!("mutation_rate must lie in [0, 1], got {}", self.mutation_rate));
        }
        if !(self.similarity_threshold > 0.0 && self.similarity_threshold < 1.0) {
            return bad(format!(
                "similarity_threshold must lie in (0, 1), got {}",
                self.similarity_threshold
            ));
        }
        if self.population_capacity == 0 || self.max_populations == Some(0) {
            return bad("population_capacity and max_populations must be at least 1".into());
        }
        if !(self.removal_fraction > 0.0 && self.removal_fraction < 1.0) {
            return bad(format!(
                "removal_fraction must lie in (0, 1), got {}",
                self.removal_fraction
            ));
        }
        if self.max_offspring == 0 {
            return bad("max_offspring must be at least 1".into());
        }
        if let Some(b) = self.budget_secs {
            if b.is_nan() || b <= 0.0 {
                return bad(format!("budget_secs must be positive, got {b}"));
            }
        }
        Ok(())
    }

    pub fn population_config(&self) -> PopulationConfig {
        PopulationConfig {
            similarity_threshold: self.similarity_threshold,
            capacity: self.population_capacity,
            max_populations: self.max_populations,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dismantle(#[from] DismantleError),
    #[error(transparent)]
    Operator(#[from] VariationError),
    #[error(transparent)]
    Population(#[from] PopulationError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationStats {
    pub id: usize,
    pub size: usize,
    pub mean_fitness: f64,
    pub max_fitness: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochCounts {
    /// Valid functions that entered the round (after mutation).
    pub generated: usize,
    /// Candidates that failed validation.
    pub rejected: usize,
    /// Functions admitted to a population.
    pub accepted: usize,
    /// Functions a full population turned away.
    pub discarded: usize,
    pub evicted: usize,
    pub mutated: usize,
    pub new_populations: usize,
    /// Parent re-draws after empty rounds.
    pub retries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSoFar {
    pub id: u64,
    pub fitness: f64,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub populations: Vec<PopulationStats>,
    pub counts: EpochCounts,
    pub best: BestSoFar,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Individual,
    pub records: Vec<EpochRecord>,
    pub populations: PopulationSet,
    /// Every candidate turned away by validation, with its epoch.
    pub rejections: Vec<(usize, Rejection)>,
}

pub fn run(g: &Graph, cfg: &EvolutionConfig, op: &dyn VariationOperator) -> Result<RunResult, EngineError> {
    run_with_observer(g, cfg, op, |_| {})
}

/// Like [`run`], calling `observe` as soon as each epoch record is final.
pub fn run_with_observer(
    g: &Graph,
    cfg: &EvolutionConfig,
    op: &dyn VariationOperator,
    mut observe: impl FnMut(&EpochRecord),
) -> Result<RunResult, EngineError> {
    cfg.validate()?;
    if g.edge_count() == 0 {
        return Err(DismantleError::Edgeless.into());
    }
    let started = cfg.budget_secs.map(|b| (std::time::Instant::now(), b));
    let cache = MetricCache::new();
    let mut state = State {
        cfg,
        evaluator: Evaluator::new(g, &cache),
        ps: PopulationSet::new(cfg.population_config())?,
        records: Vec::new(),
        rejections: Vec::new(),
    };

    state.initialize()?;
    observe(state.records.last().expect("epoch 0 recorded"));

    let last_epoch = if cfg.ablation.single_epoch { 1 } else { cfg.epochs };
    for epoch in 1..=last_epoch {
        if let Some((t0, budget)) = started {
            if t0.elapsed().as_secs_f64() >= budget {
                break;
            }
        }
        state.epoch(epoch, op)?;
        observe(state.records.last().expect("epoch recorded"));
    }

    let best = state.ps.best()?.clone();
    Ok(RunResult {
        best,
        records: state.records,
        populations: state.ps,
        rejections: state.rejections,
    })
}

struct State<'a> {
    cfg: &'a EvolutionConfig,
    evaluator: Evaluator<'a>,
    ps: PopulationSet,
    records: Vec<EpochRecord>,
    rejections: Vec<(usize, Rejection)>,
}

/// A validated function waiting for evaluation.
struct Candidate {
    expr: ScoreExpr,
    origin: Origin,
    parent_ids: Vec<u64>,
}

impl State<'_> {
    fn pooled(&self) -> bool {
        self.cfg.ablation.no_population_mgmt
    }

    fn initialize(&mut self) -> Result<(), EngineError> {
        let exprs: Vec<ScoreExpr> = if self.cfg.ablation.no_manual_init {
            (0..10)
                .map(|i| {
                    random_expr(
                        seed::derive(self.cfg.master_seed, &[Purpose::RandomInit as u64, i]),
                        RANDOM_INIT_DEPTH,
                    )
                })
                .collect()
        } else {
            initial_functions()
        };
        let fitness = self.evaluate_all(&exprs)?;
        let mut counts = EpochCounts {
            generated: exprs.len(),
            ..Default::default()
        };
        for (expr, f) in exprs.into_iter().zip(fitness) {
            let ind = self.ps.new_individual(expr, f, Origin::Initial, vec![], 0);
            if self.pooled() && !self.ps.populations().is_empty() {
                self.ps.insert_into(0, ind);
            } else {
                let cap = if self.pooled() {
                    usize::MAX
                } else {
                    self.cfg.population_capacity
                };
                self.ps.seed_population_with_capacity(ind, cap);
                counts.new_populations += 1;
            }
            counts.accepted += 1;
        }
        self.record(0, counts)
    }

    fn epoch(&mut self, epoch: usize, op: &dyn VariationOperator) -> Result<(), EngineError> {
        let mut counts = EpochCounts::default();
        let mut round = Vec::new();
        for attempt in 0..=self.cfg.round_retries {
            if attempt > 0 {
                counts.retries += 1;
            }
            round = self.variation_round(epoch, attempt, op, &mut counts)?;
            if !round.is_empty() {
                break;
            }
        }
        let exprs: Vec<ScoreExpr> = round.iter().map(|c| c.expr.clone()).collect();
        let fitness = self.evaluate_all(&exprs)?;
        counts.generated = round.len();
        for (c, f) in round.into_iter().zip(fitness) {
            let ind = self.ps.new_individual(c.expr, f, c.origin, c.parent_ids, epoch);
            let placement = if self.pooled() {
                self.ps.insert_into(0, ind)
            } else {
                self.ps.classify(ind)
            };
            match placement {
                Placement::Inserted { .. } => counts.accepted += 1,
                Placement::Replaced { .. } => {
                    counts.accepted += 1;
                    counts.evicted += 1;
                }
                Placement::Discarded { .. } => counts.discarded += 1,
                Placement::NewPopulation { .. } => {
                    counts.accepted += 1;
                    counts.new_populations += 1;
                }
            }
        }
        self.record(epoch, counts)
    }

    /// Parent groups for one crossover request each.
    fn parent_groups(&self, epoch: usize, attempt: usize) -> Result<Vec<Vec<Individual>>, EngineError> {
        let mut rng = seed::rng_for(
            self.cfg.master_seed,
            &[Purpose::Selection as u64, epoch as u64, attempt as u64],
        );
        if self.cfg.ablation.single_epoch {
            return Ok(vec![self.ps.individuals().cloned().collect()]);
        }
        if self.pooled() {
            let pool = self.ps.populations()[0].members();
            let k = POOL_PARENTS.min(pool.len());
            let mut idx = sample(&mut rng, pool.len(), k).into_vec();
            idx.sort_unstable();
            return Ok(vec![idx.into_iter().map(|i| pool[i].clone()).collect()]);
        }
        let sets = select_parents_with(&self.ps, &mut rng, self.cfg.inter_pairs)?;
        let mut groups = Vec::with_capacity(1 + sets.inter.len());
        groups.push(sets.intra);
        groups.extend(sets.inter);
        Ok(groups)
    }

    fn variation_round(
        &mut self,
        epoch: usize,
        attempt: usize,
        op: &dyn VariationOperator,
        counts: &mut EpochCounts,
    ) -> Result<Vec<Candidate>, EngineError> {
        let master = self.cfg.master_seed;
        let (e, a) = (epoch as u64, attempt as u64);
        let groups: Vec<Vec<Individual>> = self
            .parent_groups(epoch, attempt)?
            .into_iter()
            .filter(|g| g.len() >= 2)
            .collect();
        let inputs: Vec<Vec<(ScoreExpr, f64)>> = groups
            .iter()
            .map(|g| g.iter().map(|i| (i.expr.clone(), i.fitness)).collect())
            .collect();
        let seeds: Vec<u64> = (0..groups.len() as u64)
            .map(|i| seed::derive(master, &[Purpose::Crossover as u64, e, a, i]))
            .collect();

        let mut offspring = Vec::new();
        for (group, report) in groups.iter().zip(op.crossover_batch(&inputs, &seeds)) {
            let report = report?;
            counts.rejected += report.discarded.len();
            self.rejections.extend(report.discarded.into_iter().map(|r| (epoch, r)));
            let parent_ids: Vec<u64> = group.iter().map(|i| i.id).collect();
            offspring.extend(report.accepted.into_iter().map(|expr| Candidate {
                expr,
                origin: Origin::Crossover,
                parent_ids: parent_ids.clone(),
            }));
        }

        let mut coin = seed::rng_for(master, &[Purpose::MutationCoin as u64, e, a]);
        let chosen: Vec<usize> = (0..offspring.len())
            .filter(|_| coin.random_bool(self.cfg.mutation_rate))
            .collect();
        let exprs: Vec<ScoreExpr> = chosen.iter().map(|&i| offspring[i].expr.clone()).collect();
        let seeds: Vec<u64> = chosen
            .iter()
            .map(|&i| seed::derive(master, &[Purpose::Mutation as u64, e, a, i as u64]))
            .collect();
        for (&i, report) in chosen.iter().zip(op.mutate_batch(&exprs, &seeds)) {
            let report = report?;
            counts.rejected += report.discarded.len();
            self.rejections.extend(report.discarded.into_iter().map(|r| (epoch, r)));
            if let Some(m) = report.accepted.into_iter().next() {
                offspring[i].expr = m;
                offspring[i].origin = Origin::Mutation;
                counts.mutated += 1;
            }
        }
        Ok(offspring)
    }

    fn evaluate_all(&self, exprs: &[ScoreExpr]) -> Result<Vec<f64>, EngineError> {
        let one = |e: &ScoreExpr| {
            fitness_with(
                &self.evaluator,
                e,
                self.cfg.removal_fraction,
                self.cfg.fitness_mode,
                self.cfg.anc_normalization,
            )
        };
        #[cfg(feature = "parallel")]
        let out: Result<Vec<f64>, DismantleError> = {
            use rayon::prelude::*;
            exprs.par_iter().map(one).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let out: Result<Vec<f64>, DismantleError> = exprs.iter().map(one).collect();
        Ok(out?)
    }

    fn record(&mut self, epoch: usize, counts: EpochCounts) -> Result<(), EngineError> {
        let best = self.ps.best()?;
        let record = EpochRecord {
            epoch,
            populations: self
                .ps
                .populations()
                .iter()
                .map(|p| PopulationStats {
                    id: p.id(),
                    size: p.len(),
                    mean_fitness: p.mean_fitness(),
                    max_fitness: p.max_fitness(),
                })
                .collect(),
            counts,
            best: BestSoFar {
                id: best.id,
                fitness: best.fitness,
                expr: best.expr.to_string(),
            },
        };
        self.records.push(record);
        Ok(())
    }
}

/// One JSON object per line.
pub fn records_to_jsonl(records: &[EpochRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Long-format `epoch,population_id,value` tables. Populations that do not
/// exist yet in an epoch have no rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TelemetryTables {
    pub size: String,
    pub mean_fitness: String,
    pub max_fitness: String,
}

pub fn export_telemetry(records: &[EpochRecord]) -> TelemetryTables {
    let header = "epoch,population_id,value\n";
    let mut t = TelemetryTables {
        size: header.into(),
        mean_fitness: header.into(),
        max_fitness: header.into(),
    };
    for r in records {
        for p in &r.populations {
            let _ = writeln!(t.size, "{},{},{}", r.epoch, p.id, p.size);
            let _ = writeln!(t.mean_fitness, "{},{},{}", r.epoch, p.id, p.mean_fitness);
            let _ = writeln!(t.max_fitness, "{},{},{}", r.epoch, p.id, p.max_fitness);
        }
    }
    t
}
