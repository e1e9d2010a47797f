//! Individuals, similarity-grouped populations, and parent selection.
//!
//! A new individual joins the population whose centroid embedding is most
//! similar to its own, provided that similarity exceeds the threshold `τ`;
//! otherwise it founds a new population. Full populations only accept
//! individuals fitter than their weakest member, which is then evicted.

mod embed;
mod initial;
mod select;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::ScoreExpr;

pub use embed::{embed, EMBEDDING_DIM};
pub use initial::{initial_functions, INITIAL_FUNCTIONS};
pub use select::{select_parents, select_parents_with, weighted_pick, ParentSets};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PopulationError {
    #[error("population set is empty")]
    Empty,
    #[error("similarity threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("capacity must be at least 1")]
    InvalidCapacity,
    #[error("cosine similarity of a zero vector is undefined")]
    ZeroVector,
    #[error("vector dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Initial,
    Crossover,
    Mutation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Individual {
    pub id: u64,
    pub expr: ScoreExpr,
    pub fitness: f64,
    #[serde(skip)]
    pub embedding: Vec<f64>,
    pub parent_ids: Vec<u64>,
    pub origin: Origin,
    pub epoch_created: usize,
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, PopulationError> {
    if a.len() != b.len() {
        return Err(PopulationError::DimensionMismatch(a.len(), b.len()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(PopulationError::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    id: usize,
    members: Vec<Individual>,
    centroid: Vec<f64>,
    capacity: usize,
}

impl Population {
    fn new(id: usize, capacity: usize, founder: Individual) -> Self {
        let mut pop = Self {
            id,
            members: vec![founder],
            centroid: Vec::new(),
            capacity,
        };
        pop.refresh();
        pop
    }

    pub fn id(&self) -> usize {
        self.id
    }

    /// Sorted by fitness descending, then id ascending.
    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn centroid(&self) -> &[f64] {
        &self.centroid
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() >= self.capacity
    }

    pub fn mean_fitness(&self) -> f64 {
        self.members.iter().map(|m| m.fitness).sum::<f64>() / self.members.len() as f64
    }

    pub fn max_fitness(&self) -> f64 {
        self.members.first().map_or(0.0, |m| m.fitness)
    }

    fn refresh(&mut self) {
        self.members
            .sort_by(|a, b| b.fitness.total_cmp(&a.fitness).then(a.id.cmp(&b.id)));
        self.centroid = mean_embedding(&self.members);
    }

    /// Index of the member to evict: lowest fitness, oldest id among ties.
    fn weakest(&self) -> usize {
        let min = self.members.iter().map(|m| m.fitness).fold(f64::INFINITY, f64::min);
        self.members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.fitness == min)
            .min_by_key(|(_, m)| m.id)
            .map(|(i, _)| i)
            .expect("population is never empty")
    }
}

pub fn mean_embedding(members: &[Individual]) -> Vec<f64> {
    let dim = members.first().map_or(0, |m| m.embedding.len());
    let mut c = vec![0.0; dim];
    for m in members {
        for (acc, x) in c.iter_mut().zip(&m.embedding) {
            *acc += x;
        }
    }
    let n = members.len() as f64;
    c.iter_mut().for_each(|x| *x /= n);
    c
}

/// Where a classified individual ended up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "placement", rename_all = "snake_case")]
pub enum Placement {
    Inserted { population: usize },
    Replaced { population: usize, evicted: u64 },
    Discarded { population: usize },
    NewPopulation { population: usize },
}

impl Placement {
    pub fn accepted(&self) -> bool {
        !matches!(self, Placement::Discarded { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    /// Similarity an individual must strictly exceed to join a population.
    pub similarity_threshold: f64,
    pub capacity: usize,
    /// Once this many populations exist, newcomers join their most similar
    /// population regardless of the threshold. `None` means unbounded.
    pub max_populations: Option<usize>,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            similarity_threshold: 0.93,
            capacity: 10,
            max_populations: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PopulationSet {
    populations: Vec<Population>,
    config: PopulationConfig,
    next_id: u64,
}

impl PopulationSet {
    pub fn new(config: PopulationConfig) -> Result<Self, PopulationError> {
        let tau = config.similarity_threshold;
        if !(tau > 0.0 && tau < 1.0) {
            return Err(PopulationError::InvalidThreshold(tau));
        }
        if config.capacity == 0 || config.max_populations == Some(0) {
            return Err(PopulationError::InvalidCapacity);
        }
        Ok(Self {
            populations: Vec::new(),
            config,
            next_id: 0,
        })
    }

    pub fn config(&self) -> &PopulationConfig {
        &self.config
    }

    pub fn populations(&self) -> &[Population] {
        &self.populations
    }

    pub fn population(&self, id: usize) -> Option<&Population> {
        self.populations.iter().find(|p| p.id == id)
    }

    pub fn individual_count(&self) -> usize {
        self.populations.iter().map(Population::len).sum()
    }

    pub fn individuals(&self) -> impl Iterator<Item = &Individual> {
        self.populations.iter().flat_map(|p| p.members.iter())
    }

    /// Allocates an id and computes the embedding.
    pub fn new_individual(
        &mut self,
        expr: ScoreExpr,
        fitness: f64,
        origin: Origin,
        parent_ids: Vec<u64>,
        epoch_created: usize,
    ) -> Individual {
        let id = self.next_id;
        self.next_id += 1;
        let embedding = embed(&expr);
        Individual {
            id,
            expr,
            fitness,
            embedding,
            parent_ids,
            origin,
            epoch_created,
        }
    }

    /// Starts a new population with `ind` as its only member; returns its id.
    pub fn seed_population(&mut self, ind: Individual) -> usize {
        self.seed_population_with_capacity(ind, self.config.capacity)
    }

    pub fn seed_population_with_capacity(&mut self, ind: Individual, capacity: usize) -> usize {
        let id = self.populations.len();
        self.populations.push(Population::new(id, capacity, ind));
        id
    }

    /// Inserts into a specific population, applying the capacity rule.
    pub fn insert_into(&mut self, population: usize, ind: Individual) -> Placement {
        let pop = &mut self.populations[population];
        if !pop.is_full() {
            pop.members.push(ind);
            pop.refresh();
            return Placement::Inserted { population };
        }
        let weakest = pop.weakest();
        if ind.fitness > pop.members[weakest].fitness {
            let evicted = pop.members.swap_remove(weakest).id;
            pop.members.push(ind);
            pop.refresh();
            Placement::Replaced { population, evicted }
        } else {
            Placement::Discarded { population }
        }
    }

    /// Similarity of `embedding` to every population centroid.
    pub fn similarities(&self, embedding: &[f64]) -> Vec<f64> {
        self.populations
            .iter()
            .map(|p| cosine_similarity(embedding, &p.centroid).unwrap_or(0.0))
            .collect()
    }

    pub fn classify(&mut self, ind: Individual) -> Placement {
        let sims = self.similarities(&ind.embedding);
        let best = sims
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, f64)>, (i, &s)| match acc {
                Some((_, bs)) if bs >= s => acc,
                _ => Some((i, s)),
            });
        match best {
            Some((i, s))
                if s > self.config.similarity_threshold
                    || self.config.max_populations.is_some_and(|m| self.populations.len() >= m) =>
            {
                self.insert_into(i, ind)
            }
            _ => Placement::NewPopulation {
                population: self.seed_population(ind),
            },
        }
    }

    /// Highest fitness, ties broken by lowest id.
    pub fn best(&self) -> Result<&Individual, PopulationError> {
        self.individuals()
            .max_by(|a, b| a.fitness.total_cmp(&b.fitness).then(b.id.cmp(&a.id)))
            .ok_or(PopulationError::Empty)
    }

    pub fn snapshot(&self) -> PopulationSnapshot {
        PopulationSnapshot {
            populations: self
                .populations
                .iter()
                .map(|p| PopulationView {
                    id: p.id,
                    capacity: p.capacity,
                    members: p
                        .members
                        .iter()
                        .map(|m| MemberView {
                            id: m.id,
                            fitness: m.fitness,
                            origin: m.origin,
                            expr: m.expr.to_string(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberView {
    pub id: u64,
    pub fitness: f64,
    pub origin: Origin,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationView {
    pub id: usize,
    pub capacity: usize,
    pub members: Vec<MemberView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSnapshot {
    pub populations: Vec<PopulationView>,
}
