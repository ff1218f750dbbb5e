//! The six optimization variables, objective selection, Pareto dominance and
//! the normalized rating used to compare solutions across runs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plan::{DecodedPlan, Evaluation};
use crate::scenario::MissionScenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    Uavs,
    FlightTime,
    Fuel,
    Distance,
    Cost,
    Makespan,
}

impl Objective {
    pub const ALL: [Objective; 6] = [
        Objective::Uavs,
        Objective::FlightTime,
        Objective::Fuel,
        Objective::Distance,
        Objective::Cost,
        Objective::Makespan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Objective::Uavs => "uavs",
            Objective::FlightTime => "flight-time",
            Objective::Fuel => "fuel",
            Objective::Distance => "distance",
            Objective::Cost => "cost",
            Objective::Makespan => "makespan",
        }
    }

    /// Position in the full six-component vector.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectionError {
    #[error("unknown objective `{0}` (expected one of uavs, flight-time, fuel, distance, cost, makespan)")]
    Unknown(String),
    #[error("objective selection is empty")]
    Empty,
    #[error("objective `{0}` selected twice")]
    Duplicate(Objective),
}

impl FromStr for Objective {
    type Err = SelectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Objective::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SelectionError::Unknown(s.to_string()))
    }
}

/// Optimization variables of one plan. Infeasible plans carry `f64::MAX`
/// in every component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub n_uavs: f64,
    pub flight_time: f64,
    pub fuel: f64,
    pub distance: f64,
    pub cost: f64,
    pub makespan: f64,
    pub feasible: bool,
}

impl ObjectiveVector {
    pub const PENALTY: f64 = f64::MAX;

    pub fn penalty() -> Self {
        Self::from_array([Self::PENALTY; 6], false)
    }

    pub fn from_array(v: [f64; 6], feasible: bool) -> Self {
        Self {
            n_uavs: v[0],
            flight_time: v[1],
            fuel: v[2],
            distance: v[3],
            cost: v[4],
            makespan: v[5],
            feasible,
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.n_uavs,
            self.flight_time,
            self.fuel,
            self.distance,
            self.cost,
            self.makespan,
        ]
    }

    pub fn get(&self, o: Objective) -> f64 {
        self.to_array()[o.index()]
    }
}

/// Ordered, duplicate-free, non-empty subset of the objectives.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Objective>", into = "Vec<Objective>")]
pub struct ObjectiveSelection(Vec<Objective>);

impl ObjectiveSelection {
    pub fn new(objectives: Vec<Objective>) -> Result<Self, SelectionError> {
        if objectives.is_empty() {
            return Err(SelectionError::Empty);
        }
        for (i, o) in objectives.iter().enumerate() {
            if objectives[..i].contains(o) {
                return Err(SelectionError::Duplicate(*o));
            }
        }
        Ok(Self(objectives))
    }

    pub fn all() -> Self {
        Self(Objective::ALL.to_vec())
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Selected components of `v`, in selection order.
    pub fn project(&self, v: &ObjectiveVector) -> Vec<f64> {
        self.0.iter().map(|o| v.get(*o)).collect()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.0.iter().map(|o| o.name()).collect()
    }
}

impl Default for ObjectiveSelection {
    fn default() -> Self {
        Self(vec![Objective::Distance, Objective::Makespan])
    }
}

impl FromStr for ObjectiveSelection {
    type Err = SelectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let list = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(list)
    }
}

impl TryFrom<Vec<Objective>> for ObjectiveSelection {
    type Error = SelectionError;

    fn try_from(v: Vec<Objective>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ObjectiveSelection> for Vec<Objective> {
    fn from(s: ObjectiveSelection) -> Self {
        s.0
    }
}

impl fmt::Display for ObjectiveSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names().join(","))
    }
}

/// Objective values of a feasible plan.
pub fn compute_objectives(scenario: &MissionScenario, plan: &DecodedPlan) -> ObjectiveVector {
    let mut v = [0.0; 6];
    for s in plan.schedules.iter().filter(|s| s.is_used()) {
        v[0] += 1.0;
        v[1] += s.flight_time;
        v[2] += s.total_fuel;
        v[3] += s.total_distance;
        v[4] += scenario.uavs[s.uav].cost_per_hour * s.flight_time;
        v[5] = f64::max(v[5], s.return_time);
    }
    ObjectiveVector::from_array(v, true)
}

/// Objective values of an evaluation, or the penalty vector when infeasible.
pub fn objectives_of(scenario: &MissionScenario, eval: &Evaluation) -> ObjectiveVector {
    match &eval.plan {
        Some(plan) if eval.report.feasible => compute_objectives(scenario, plan),
        _ => ObjectiveVector::penalty(),
    }
}

/// Pareto dominance (minimization) on the selected components.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector, sel: &ObjectiveSelection) -> bool {
    dominates_slice(&sel.project(a), &sel.project(b))
}

pub fn dominates_slice(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        strict |= x < y;
    }
    strict
}

/// Per-objective normalization bounds of a batch of solutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingBounds {
    pub min: [f64; 6],
    pub max: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatingError {
    #[error("cannot rate an empty batch")]
    EmptyBatch,
    #[error("batch minimum exceeds maximum for `{0}`")]
    InvertedBounds(Objective),
}

impl RatingBounds {
    pub fn from_batch(batch: &[ObjectiveVector]) -> Result<Self, RatingError> {
        if batch.is_empty() {
            return Err(RatingError::EmptyBatch);
        }
        let mut min = [f64::INFINITY; 6];
        let mut max = [f64::NEG_INFINITY; 6];
        for v in batch {
            for (i, x) in v.to_array().into_iter().enumerate() {
                min[i] = min[i].min(x);
                max[i] = max[i].max(x);
            }
        }
        Ok(Self { min, max })
    }
}

/// Sum over all six objectives of the min-max normalized value; an objective
/// with `min == max` contributes 0.
pub fn rating(
    solutions: &[ObjectiveVector],
    bounds: &RatingBounds,
) -> Result<Vec<f64>, RatingError> {
    if solutions.is_empty() {
        return Err(RatingError::EmptyBatch);
    }
    for o in Objective::ALL {
        if bounds.min[o.index()] > bounds.max[o.index()] {
            return Err(RatingError::InvertedBounds(o));
        }
    }
    Ok(solutions
        .iter()
        .map(|s| {
            s.to_array()
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let range = bounds.max[i] - bounds.min[i];
                    if range > 0.0 {
                        (v - bounds.min[i]) / range
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect())
}
