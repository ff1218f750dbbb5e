//! NSGA-II based genetic search over plan chromosomes.

mod operators;
mod sort;

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objectives::{dominates_slice, objectives_of, ObjectiveSelection, ObjectiveVector};
use crate::plan::{evaluate, Chromosome, PlanningContext};

pub use operators::{
    crossover, init_population, insert_move, mutate, pmx, random_chromosome, sample_task,
};
pub use sort::{crowding_distances, front_ranks, rank_and_crowd};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    /// λ
    pub population_size: usize,
    /// μ
    pub elite_size: usize,
    pub mutation_probability: f64,
    pub max_generations: usize,
    pub stop_generations: usize,
    pub seed: u64,
    pub objectives: ObjectiveSelection,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 1000,
            elite_size: 100,
            mutation_probability: 0.1,
            max_generations: 300,
            stop_generations: 10,
            seed: 0,
            objectives: ObjectiveSelection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("elite size {elite} must be between 1 and the population size {population}")]
    Elite { elite: usize, population: usize },
    #[error("mutation probability {0} outside [0, 1]")]
    Mutation(f64),
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.elite_size == 0 || self.elite_size > self.population_size {
            return Err(ConfigError::Elite {
                elite: self.elite_size,
                population: self.population_size,
            });
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return Err(ConfigError::Mutation(self.mutation_probability));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub chromosome: Chromosome,
    pub objectives: ObjectiveVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedIndividual {
    pub chromosome: Chromosome,
    pub objectives: ObjectiveVector,
    pub rank: usize,
    pub crowding: f64,
}

/// Ranks a population on the selected objectives.
pub fn nsga2_rank(population: &[Individual], sel: &ObjectiveSelection) -> Vec<RankedIndividual> {
    let pts: Vec<Vec<f64>> = population
        .iter()
        .map(|i| sel.project(&i.objectives))
        .collect();
    rank_and_crowd(&pts)
        .into_iter()
        .zip(population)
        .map(|((rank, crowding), ind)| RankedIndividual {
            chromosome: ind.chromosome.clone(),
            objectives: ind.objectives,
            rank,
            crowding,
        })
        .collect()
}

/// Indices ordered best first: lower rank, then larger crowding, then index.
fn best_order(ranked: &[(usize, f64)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..ranked.len()).collect();
    idx.sort_by(|&a, &b| {
        ranked[a]
            .0
            .cmp(&ranked[b].0)
            .then(ranked[b].1.total_cmp(&ranked[a].1))
            .then(a.cmp(&b))
    });
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchiveEntry {
    pub chromosome: Chromosome,
    pub objectives: ObjectiveVector,
}

/// Mutually non-dominated feasible solutions, one per distinct objective vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoArchive {
    pub selection: ObjectiveSelection,
    pub entries: Vec<ArchiveEntry>,
}

pub type ArchiveKey = Vec<i64>;

/// Selected components rounded to 1e-9, used for set equality.
pub fn archive_key(sel: &ObjectiveSelection, v: &ObjectiveVector) -> ArchiveKey {
    sel.project(v)
        .iter()
        .map(|x| (x * 1e9).round() as i64)
        .collect()
}

impl ParetoArchive {
    pub fn new(selection: ObjectiveSelection) -> Self {
        Self {
            selection,
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn vectors(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|e| e.objectives).collect()
    }

    /// Selected objective values of every entry.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|e| self.selection.project(&e.objectives))
            .collect()
    }

    pub fn keys(&self) -> BTreeSet<ArchiveKey> {
        self.entries
            .iter()
            .map(|e| archive_key(&self.selection, &e.objectives))
            .collect()
    }

    /// Offers a candidate; returns whether the archive changed.
    pub fn offer(&mut self, chromosome: &Chromosome, objectives: &ObjectiveVector) -> bool {
        if !objectives.feasible {
            return false;
        }
        let sel = &self.selection;
        let p = sel.project(objectives);
        let key = archive_key(sel, objectives);
        for e in &self.entries {
            let q = sel.project(&e.objectives);
            if dominates_slice(&q, &p) || archive_key(sel, &e.objectives) == key {
                return false;
            }
        }
        self.entries
            .retain(|e| !dominates_slice(&p, &sel.project(&e.objectives)));
        self.entries.push(ArchiveEntry {
            chromosome: chromosome.clone(),
            objectives: *objectives,
        });
        self.entries
            .sort_by_key(|e| archive_key(sel, &e.objectives));
        true
    }
}

/// Stops after a fixed number of consecutive generations without archive change.
#[derive(Debug, Clone)]
pub struct StopCriterion {
    limit: usize,
    unchanged: usize,
    last: Option<BTreeSet<ArchiveKey>>,
}

impl StopCriterion {
    pub fn new(limit: usize) -> Self {
        Self {
            limit,
            unchanged: 0,
            last: None,
        }
    }

    /// Records the archive of the generation just finished; true means stop.
    pub fn observe(&mut self, keys: BTreeSet<ArchiveKey>) -> bool {
        match &self.last {
            Some(prev) if *prev == keys => self.unchanged += 1,
            _ => {
                self.unchanged = 0;
                self.last = Some(keys);
            }
        }
        self.unchanged >= self.limit
    }

    pub fn unchanged_for(&self) -> usize {
        self.unchanged
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub archive_size: usize,
    pub feasible: usize,
    /// Minimum of each selected objective over the archive.
    pub best: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveOutcome {
    pub archive: ParetoArchive,
    /// Generations run after the initial population.
    pub generations: usize,
    /// Last generation in which the archive changed.
    pub converged_at: usize,
    pub history: Vec<GenerationStats>,
    pub found_feasible: bool,
}

fn evaluate_all(ctx: &PlanningContext, chromosomes: Vec<Chromosome>) -> Vec<Individual> {
    chromosomes
        .into_par_iter()
        .map(|chromosome| {
            let objectives = objectives_of(ctx.scenario(), &evaluate(ctx, &chromosome));
            Individual {
                chromosome,
                objectives,
            }
        })
        .collect()
}

fn stats(generation: usize, archive: &ParetoArchive, population: &[Individual]) -> GenerationStats {
    let dims = archive.selection.len();
    let best = (0..dims)
        .map(|d| {
            archive
                .points()
                .iter()
                .map(|p| p[d])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    GenerationStats {
        generation,
        archive_size: archive.len(),
        feasible: population.iter().filter(|i| i.objectives.feasible).count(),
        best,
    }
}

/// Runs the genetic search from a random initial population.
pub fn evolve(ctx: &PlanningContext, config: &GaConfig) -> Result<EvolveOutcome, ConfigError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial = init_population(ctx, config.population_size, &mut rng);
    run(ctx, config, initial, rng)
}

/// Runs the genetic search from a given initial population.
pub fn evolve_from(
    ctx: &PlanningContext,
    config: &GaConfig,
    initial: Vec<Chromosome>,
) -> Result<EvolveOutcome, ConfigError> {
    run(ctx, config, initial, ChaCha8Rng::seed_from_u64(config.seed))
}

fn run(
    ctx: &PlanningContext,
    config: &GaConfig,
    initial: Vec<Chromosome>,
    mut rng: ChaCha8Rng,
) -> Result<EvolveOutcome, ConfigError> {
    config.validate()?;
    let sel = &config.objectives;
    let lambda = config.population_size;
    let mu = config.elite_size;

    let mut population = evaluate_all(ctx, initial);
    let mut archive = ParetoArchive::new(sel.clone());
    for ind in &population {
        archive.offer(&ind.chromosome, &ind.objectives);
    }
    let mut stop = StopCriterion::new(config.stop_generations);
    stop.observe(archive.keys());
    let mut history = vec![stats(0, &archive, &population)];
    let mut converged_at = 0;
    let mut generation = 0;

    while generation < config.max_generations && stop.unchanged_for() < config.stop_generations {
        generation += 1;
        let pts: Vec<Vec<f64>> = population
            .iter()
            .map(|i| sel.project(&i.objectives))
            .collect();
        let ranked = rank_and_crowd(&pts);
        let elite: Vec<usize> = best_order(&ranked).into_iter().take(mu).collect();
        let weights: Vec<f64> = elite
            .iter()
            .map(|&i| 1.0 / (1.0 + ranked[i].0 as f64))
            .collect();
        let wheel = WeightedIndex::new(&weights).expect("positive weights");

        let n_offspring = lambda.saturating_sub(mu);
        let mut offspring = Vec::with_capacity(n_offspring + 1);
        while offspring.len() < n_offspring {
            let a = &population[elite[wheel.sample(&mut rng)]].chromosome;
            let b = &population[elite[wheel.sample(&mut rng)]].chromosome;
            let (mut c1, mut c2) = crossover(a, b, &mut rng);
            mutate(ctx, &mut c1, config.mutation_probability, &mut rng);
            mutate(ctx, &mut c2, config.mutation_probability, &mut rng);
            offspring.push(c1);
            offspring.push(c2);
        }
        offspring.truncate(n_offspring);

        population.extend(evaluate_all(ctx, offspring));
        let pts: Vec<Vec<f64>> = population
            .iter()
            .map(|i| sel.project(&i.objectives))
            .collect();
        let ranked = rank_and_crowd(&pts);
        let keep = best_order(&ranked)
            .into_iter()
            .take(lambda)
            .collect::<Vec<_>>();
        let mut slots: Vec<Option<Individual>> = population.into_iter().map(Some).collect();
        population = keep
            .into_iter()
            .map(|i| slots[i].take().expect("unique index"))
            .collect();

        let mut changed = false;
        for ind in &population {
            changed |= archive.offer(&ind.chromosome, &ind.objectives);
        }
        if changed {
            converged_at = generation;
        }
        stop.observe(archive.keys());
        history.push(stats(generation, &archive, &population));
    }

    log::debug!(
        "evolve: {} generations, archive {} (last change at {})",
        generation,
        archive.len(),
        converged_at
    );
    Ok(EvolveOutcome {
        found_feasible: !archive.is_empty(),
        archive,
        generations: generation,
        converged_at,
        history,
    })
}
