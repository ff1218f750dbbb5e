//! Multi-objective mission planning for fleets of UAVs controlled from
//! ground control stations.
//!
//! A [`MissionScenario`] is turned into a [`PlanningContext`] (planned
//! paths, task geometry), plans are encoded as six-allele [`Chromosome`]s,
//! checked by [`evaluate`] and optimized with an NSGA-II based genetic
//! algorithm ([`evolve`]). Small instances can be solved exactly with
//! [`exact_pof`] and compared through the hypervolume gap.

pub mod dataset;
pub mod experiment;
pub mod geo;
pub mod io;
pub mod nsga;
pub mod objectives;
pub mod oracle;
pub mod plan;
pub mod report;
pub mod scenario;

pub use geo::{distance, path_length, plan_path, Grid, Path, PathError};
pub use nsga::{evolve, EvolveOutcome, GaConfig, ParetoArchive};
pub use objectives::{
    compute_objectives, dominates, rating, Objective, ObjectiveSelection, ObjectiveVector,
    RatingBounds,
};
pub use oracle::{exact_pof, hypervolume_gap, ExactFront, FrontComparison, OracleOptions};
pub use plan::{decode, evaluate, Chromosome, ConstraintReport, DecodedPlan, PlanningContext};
pub use scenario::{validate_scenario, MissionScenario};
