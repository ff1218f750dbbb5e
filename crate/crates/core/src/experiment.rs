//! Experiment orchestration: repeated solver runs per scenario, objective
//! sweeps with a rating table, and comparison against the exact front.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geo::DEFAULT_GRID_CELLS;
use crate::nsga::{evolve, ConfigError, EvolveOutcome, GaConfig};
use crate::objectives::{rating, Objective, ObjectiveSelection, ObjectiveVector, RatingBounds};
use crate::oracle::{exact_pof, hypervolume_gap, OracleError, OracleOptions};
use crate::plan::{Chromosome, ContextError, PlanningContext};
use crate::scenario::MissionScenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    SweepObjectives,
    OracleCompare,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Solver settings; `ga.seed` is the master seed.
    pub ga: GaConfig,
    pub repetitions: usize,
    pub grid_cells: usize,
    pub oracle_budget: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            ga: GaConfig::default(),
            repetitions: 10,
            grid_cells: DEFAULT_GRID_CELLS,
            oracle_budget: crate::oracle::DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("scenario `{scenario}`: {source}")]
    Context {
        scenario: String,
        #[source]
        source: ContextError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("at least one repetition is required")]
    NoRepetitions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchiveRow {
    /// Selected objective values, in selection order.
    pub objectives: Vec<f64>,
    pub vector: ObjectiveVector,
    pub chromosome: Chromosome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub generations: usize,
    pub converged_at: usize,
    pub archive_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    /// Mean normalized objective sum of the archive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OracleSummary {
    Solved { nodes: u64, front: Vec<Vec<f64>> },
    BudgetExceeded { budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSummary {
    pub hypervolume: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingRow {
    pub objectives: Vec<String>,
    pub solutions: usize,
    pub converged_at: usize,
    /// Archive mean of every objective; absent when nothing feasible was found.
    pub mean: Option<ObjectiveVector>,
    pub rating: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub objectives: Vec<String>,
    pub best_run: usize,
    pub generations: usize,
    pub converged_at: usize,
    pub archive: Vec<ArchiveRow>,
    pub runs: Vec<RunSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<GapSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rating: Option<Vec<RatingRow>>,
}

impl ScenarioReport {
    pub fn archive_points(&self) -> Vec<Vec<f64>> {
        self.archive.iter().map(|r| r.objectives.clone()).collect()
    }

    pub fn oracle_front(&self) -> Option<&[Vec<f64>]> {
        match &self.oracle {
            Some(OracleSummary::Solved { front, .. }) => Some(front),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub mode: Mode,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub scenarios: Vec<ScenarioReport>,
}

/// Per-repetition seeds derived from the master seed.
pub fn derive_seeds(master: u64, repetitions: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..repetitions).map(|_| rng.random()).collect()
}

/// Every singleton, every pair and the full set of objectives.
pub fn sweep_selections() -> Vec<ObjectiveSelection> {
    let all = Objective::ALL;
    let mut out: Vec<ObjectiveSelection> = all
        .iter()
        .map(|&o| ObjectiveSelection::new(vec![o]).expect("singleton"))
        .collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            out.push(ObjectiveSelection::new(vec![all[i], all[j]]).expect("pair"));
        }
    }
    out.push(ObjectiveSelection::all());
    out
}

fn names(sel: &ObjectiveSelection) -> Vec<String> {
    sel.names().into_iter().map(String::from).collect()
}

fn rows(outcome: &EvolveOutcome) -> Vec<ArchiveRow> {
    let sel = &outcome.archive.selection;
    outcome
        .archive
        .entries
        .iter()
        .map(|e| ArchiveRow {
            objectives: sel.project(&e.objectives),
            vector: e.objectives,
            chromosome: e.chromosome.clone(),
        })
        .collect()
}

/// Mean over each archive of the min-max normalized selected objectives,
/// bounds pooled across all runs.
fn scores(outcomes: &[EvolveOutcome]) -> Vec<Option<f64>> {
    let pooled: Vec<Vec<f64>> = outcomes.iter().flat_map(|o| o.archive.points()).collect();
    let Some(dims) = pooled.first().map(Vec::len) else {
        return vec![None; outcomes.len()];
    };
    let lo: Vec<f64> = (0..dims)
        .map(|k| pooled.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..dims)
        .map(|k| {
            pooled
                .iter()
                .map(|p| p[k])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    outcomes
        .iter()
        .map(|o| {
            let pts = o.archive.points();
            if pts.is_empty() {
                return None;
            }
            let total: f64 = pts
                .iter()
                .map(|p| {
                    (0..dims)
                        .map(|k| {
                            let r = hi[k] - lo[k];
                            if r > 0.0 {
                                (p[k] - lo[k]) / r
                            } else {
                                0.0
                            }
                        })
                        .sum::<f64>()
                })
                .sum();
            Some(total / pts.len() as f64)
        })
        .collect()
}

/// Index of the smallest `Some` value, first on ties; 0 when all are `None`.
fn argmin(values: &[Option<f64>]) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    best.map_or(0, |(i, _)| i)
}

struct Repeated {
    runs: Vec<RunSummary>,
    best: usize,
    outcome: EvolveOutcome,
}

fn repeat(
    ctx: &PlanningContext,
    config: &ExperimentConfig,
    seeds: &[u64],
    sel: &ObjectiveSelection,
    oracle_front: Option<&[Vec<f64>]>,
) -> Result<Repeated, ExperimentError> {
    let mut outcomes = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let ga = GaConfig {
            seed,
            objectives: sel.clone(),
            ..config.ga.clone()
        };
        outcomes.push(evolve(ctx, &ga)?);
    }
    let score = scores(&outcomes);
    let gaps: Vec<Option<f64>> = outcomes
        .iter()
        .map(|o| {
            let front = oracle_front?;
            let approx = o.archive.points();
            match (front.is_empty(), approx.is_empty()) {
                (true, true) => Some(0.0),
                (false, false) => hypervolume_gap(front, &approx).ok().map(|c| c.hypervolume),
                _ => None,
            }
        })
        .collect();
    let best = if oracle_front.is_some() && gaps.iter().any(Option::is_some) {
        argmin(&gaps)
    } else {
        argmin(&score)
    };
    let runs = outcomes
        .iter()
        .zip(seeds)
        .zip(score.iter().zip(&gaps))
        .map(|((o, &seed), (&score, &gap))| RunSummary {
            seed,
            generations: o.generations,
            converged_at: o.converged_at,
            archive_size: o.archive.len(),
            gap,
            score,
        })
        .collect();
    Ok(Repeated {
        runs,
        best,
        outcome: outcomes.swap_remove(best),
    })
}

fn mean_vector(outcome: &EvolveOutcome) -> Option<ObjectiveVector> {
    let vs = outcome.archive.vectors();
    if vs.is_empty() {
        return None;
    }
    let mut sum = [0.0; 6];
    for v in &vs {
        for (s, x) in sum.iter_mut().zip(v.to_array()) {
            *s += x;
        }
    }
    Some(ObjectiveVector::from_array(
        sum.map(|s| s / vs.len() as f64),
        true,
    ))
}

fn same_objectives(a: &ObjectiveSelection, b: &ObjectiveSelection) -> bool {
    let mut x = a.objectives().to_vec();
    let mut y = b.objectives().to_vec();
    x.sort();
    y.sort();
    x == y
}

fn run_scenario(
    scenario: &MissionScenario,
    config: &ExperimentConfig,
    mode: Mode,
    seeds: &[u64],
) -> Result<ScenarioReport, ExperimentError> {
    let ctx = PlanningContext::with_grid_cells(scenario, config.grid_cells).map_err(|source| {
        ExperimentError::Context {
            scenario: scenario.name.clone(),
            source,
        }
    })?;
    let sel = config.ga.objectives.clone();

    let oracle = (mode == Mode::OracleCompare).then(|| {
        let options = OracleOptions {
            budget: config.oracle_budget,
            prune: true,
        };
        match exact_pof(&ctx, &sel, options) {
            Ok(front) => OracleSummary::Solved {
                nodes: front.nodes,
                front: front.projected(),
            },
            Err(OracleError::BudgetExceeded { budget }) => {
                log::warn!(
                    "scenario `{}`: oracle budget of {budget} nodes exceeded",
                    scenario.name
                );
                OracleSummary::BudgetExceeded { budget }
            }
        }
    });
    let front = match &oracle {
        Some(OracleSummary::Solved { front, .. }) => Some(front.as_slice()),
        _ => None,
    };

    let mut rating_rows = None;
    let primary = if mode == Mode::SweepObjectives {
        let selections = sweep_selections();
        let mut reps = Vec::with_capacity(selections.len());
        for s in &selections {
            reps.push(repeat(&ctx, config, seeds, s, None)?);
        }
        let bests: Vec<&EvolveOutcome> = reps.iter().map(|r| &r.outcome).collect();
        let means: Vec<Option<ObjectiveVector>> = bests.iter().map(|o| mean_vector(o)).collect();
        let batch: Vec<ObjectiveVector> = means.iter().flatten().copied().collect();
        let ratings: Vec<Option<f64>> = match RatingBounds::from_batch(&batch) {
            Ok(bounds) => means
                .iter()
                .map(|m| m.map(|m| rating(&[m], &bounds).expect("bounds from batch")[0]))
                .collect(),
            Err(_) => vec![None; means.len()],
        };
        rating_rows = Some(
            selections
                .iter()
                .zip(&bests)
                .zip(means.iter().zip(ratings))
                .map(|((s, o), (m, r))| RatingRow {
                    objectives: names(s),
                    solutions: o.archive.len(),
                    converged_at: o.converged_at,
                    mean: *m,
                    rating: r,
                })
                .collect(),
        );
        match selections.iter().position(|s| same_objectives(s, &sel)) {
            Some(i) => reps.swap_remove(i),
            None => repeat(&ctx, config, seeds, &sel, None)?,
        }
    } else {
        repeat(&ctx, config, seeds, &sel, front)?
    };
    let best = &primary.outcome;

    let gap = front.and_then(|f| {
        let approx = best.archive.points();
        if f.is_empty() || approx.is_empty() {
            return (f.is_empty() && approx.is_empty()).then_some(GapSummary {
                hypervolume: 0.0,
                std_error: None,
            });
        }
        hypervolume_gap(f, &approx).ok().map(|c| GapSummary {
            hypervolume: c.hypervolume,
            std_error: c.std_error,
        })
    });

    Ok(ScenarioReport {
        scenario: scenario.name.clone(),
        objectives: names(&sel),
        best_run: primary.best,
        generations: best.generations,
        converged_at: best.converged_at,
        archive: rows(best),
        runs: primary.runs.clone(),
        oracle,
        gap,
        rating: rating_rows,
    })
}

/// Runs every scenario in the given mode; reports are ordered by scenario name.
pub fn run_experiment(
    scenarios: &[MissionScenario],
    config: &ExperimentConfig,
    mode: Mode,
) -> Result<RunReport, ExperimentError> {
    config.ga.validate()?;
    if config.repetitions == 0 {
        return Err(ExperimentError::NoRepetitions);
    }
    let seeds = derive_seeds(config.ga.seed, config.repetitions);
    let mut order: Vec<&MissionScenario> = scenarios.iter().collect();
    order.sort_by(|a, b| a.name.cmp(&b.name));
    let mut reports = Vec::with_capacity(order.len());
    for s in order {
        log::info!("scenario `{}`: {:?}", s.name, mode);
        reports.push(run_scenario(s, config, mode, &seeds)?);
    }
    Ok(RunReport {
        mode,
        config: config.clone(),
        seeds,
        scenarios: reports,
    })
}
