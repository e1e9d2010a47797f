use rand::Rng;

use super::{Individual, PopulationError, PopulationSet};
use crate::seed::{self, SeededRng};

/// Parents for one round: one fitness-weighted draw per population plus
/// the elite (`intra`), and fitness-weighted pairs from within a single
/// population (`inter`).
#[derive(Debug, Clone, Default)]
pub struct ParentSets {
    pub intra: Vec<Individual>,
    pub inter: Vec<Vec<Individual>>,
}

impl ParentSets {
    pub fn is_empty(&self) -> bool {
        self.intra.is_empty() && self.inter.is_empty()
    }
}

/// Draws an index with probability proportional to `weights`; uniform when
/// every weight is zero.
pub fn weighted_pick(rng: &mut SeededRng, weights: &[f64]) -> usize {
    debug_assert!(!weights.is_empty());
    let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
    if total.is_nan() || total <= 0.0 {
        return rng.random_range(0..weights.len());
    }
    let r = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w.max(0.0);
        if acc > r {
            return i;
        }
    }
    // rounding at the top end
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

pub fn select_parents(ps: &PopulationSet, rng_seed: u64) -> Result<ParentSets, PopulationError> {
    select_parents_with(ps, &mut seed::rng(rng_seed), 1)
}

pub fn select_parents_with(
    ps: &PopulationSet,
    rng: &mut SeededRng,
    inter_pairs: usize,
) -> Result<ParentSets, PopulationError> {
    let elite = ps.best()?.clone();
    let mut intra: Vec<Individual> = Vec::with_capacity(ps.populations().len() + 1);
    for pop in ps.populations() {
        let weights: Vec<f64> = pop.members().iter().map(|m| m.fitness).collect();
        intra.push(pop.members()[weighted_pick(rng, &weights)].clone());
    }
    if !intra.iter().any(|m| m.id == elite.id) {
        intra.push(elite);
    }

    let mut inter = Vec::new();
    let eligible: Vec<_> = ps.populations().iter().filter(|p| p.len() >= 2).collect();
    if !eligible.is_empty() {
        for _ in 0..inter_pairs {
            let means: Vec<f64> = eligible.iter().map(|p| p.mean_fitness()).collect();
            let pop = eligible[weighted_pick(rng, &means)];
            let mut pool: Vec<&Individual> = pop.members().iter().collect();
            let mut pair = Vec::with_capacity(2);
            for _ in 0..2 {
                let weights: Vec<f64> = pool.iter().map(|m| m.fitness).collect();
                pair.push(pool.remove(weighted_pick(rng, &weights)).clone());
            }
            inter.push(pair);
        }
    }
    Ok(ParentSets { intra, inter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::population::{Origin, PopulationConfig};

    fn set_with(fitnesses: &[&[f64]]) -> PopulationSet {
        let mut ps = PopulationSet::new(PopulationConfig::default()).unwrap();
        for (p, fits) in fitnesses.iter().enumerate() {
            let mut pop_id = None;
            for &f in fits.iter() {
                let ind = ps.new_individual(parse("degree").unwrap(), f, Origin::Initial, vec![], 0);
                match pop_id {
                    None => pop_id = Some(ps.seed_population(ind)),
                    Some(id) => {
                        ps.insert_into(id, ind);
                    }
                };
            }
            assert_eq!(ps.populations().len(), p + 1);
        }
        ps
    }

    #[test]
    fn single_individual() {
        let ps = set_with(&[&[0.4]]);
        let parents = select_parents(&ps, 1).unwrap();
        assert_eq!(parents.intra.len(), 1);
        assert!(parents.inter.is_empty());
    }

    #[test]
    fn zero_weight_members_are_never_drawn() {
        let ps = set_with(&[&[1.0, 0.0, 0.0]]);
        for seed in 0..200 {
            let parents = select_parents(&ps, seed).unwrap();
            assert_eq!(parents.intra.len(), 1);
            assert_eq!(parents.intra[0].fitness, 1.0);
        }
    }

    #[test]
    fn elite_is_added_once() {
        let ps = set_with(&[&[0.1, 0.2], &[0.9]]);
        let parents = select_parents(&ps, 3).unwrap();
        let elite_hits = parents.intra.iter().filter(|m| m.fitness == 0.9).count();
        assert_eq!(elite_hits, 1);
        assert!(parents.intra.len() == 2 || parents.intra.len() == 3);
        assert_eq!(parents.inter.len(), 1);
        let pair = &parents.inter[0];
        assert_ne!(pair[0].id, pair[1].id);
    }

    #[test]
    fn deterministic_given_seed() {
        let ps = set_with(&[&[0.1, 0.5, 0.3], &[0.2, 0.2]]);
        let ids = |p: ParentSets| {
            (
                p.intra.iter().map(|m| m.id).collect::<Vec<_>>(),
                p.inter.iter().flatten().map(|m| m.id).collect::<Vec<_>>(),
            )
        };
        assert_eq!(
            ids(select_parents(&ps, 9).unwrap()),
            ids(select_parents(&ps, 9).unwrap())
        );
    }

    #[test]
    fn empty_set_is_an_error() {
        let ps = PopulationSet::new(PopulationConfig::default()).unwrap();
        assert!(select_parents(&ps, 0).is_err());
    }
}
