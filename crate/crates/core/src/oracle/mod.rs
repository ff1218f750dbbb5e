//! Exact Pareto fronts for small instances and the hypervolume gap metric.

mod exact;
mod hypervolume;

pub use exact::{exact_pof, ExactFront, OracleError, OracleOptions, DEFAULT_BUDGET};
pub use hypervolume::{
    hypervolume_exact, hypervolume_gap, hypervolume_mc, non_dominated, FrontComparison,
    MetricError, MC_SAMPLES,
};
