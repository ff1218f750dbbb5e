//! Shared fixtures for the criterion benchmarks.

use uavplan_core::dataset::{builtin_recipe, generate_dataset};
use uavplan_core::plan::PlanningContext;
use uavplan_core::MissionScenario;

/// Scenario of a built-in recipe; panics on unknown names.
pub fn scenario(recipe: &str) -> MissionScenario {
    let r = builtin_recipe(recipe).unwrap_or_else(|| panic!("unknown recipe {recipe}"));
    generate_dataset(&r).expect("built-in recipes generate")
}

pub fn context(recipe: &str) -> PlanningContext {
    PlanningContext::new(&scenario(recipe)).expect("generated scenarios are valid")
}
