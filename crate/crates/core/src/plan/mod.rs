//! Chromosome decoding into per-UAV schedules and constraint checking.

mod check;
mod context;
mod decode;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::SensorKind;

pub use check::{
    check_dependencies, check_gcs, check_order, check_plan, check_resources, check_sensors,
    check_temporal, evaluate, uav_reach, ConstraintFamily, ConstraintReport, Evaluation, Violation,
    ViolationCode,
};
pub use context::{ContextError, PathInfo, PlanningContext, ResolvedDependency, TaskGeometry};
pub use decode::{decode, AssignmentTimes, DecodeError, DecodedPlan, TaskLeg, UavSchedule};

/// Six-allele plan encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    /// Allele 1: UAVs assigned to each task, in slot order.
    pub assign: Vec<Vec<usize>>,
    /// Allele 2: global task order, a permutation of `0..n`.
    pub order: Vec<usize>,
    /// Allele 3: controlling GCS of each UAV.
    pub gcs: Vec<Option<usize>>,
    /// Allele 4: per task and slot, the UAV profile flown to the task.
    pub path_profile: Vec<Vec<usize>>,
    /// Allele 5: per task and slot, the sensor used.
    pub sensor: Vec<Vec<SensorKind>>,
    /// Allele 6: per UAV, the return profile.
    pub return_profile: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("allele {allele} has length {found}, expected {expected}")]
    Length {
        allele: u8,
        expected: usize,
        found: usize,
    },
    #[error("task {task}: slot vectors disagree in length")]
    SlotLength { task: usize },
    #[error("task {task}: needs {expected} UAVs, has {found}")]
    UavCount {
        task: usize,
        expected: usize,
        found: usize,
    },
    #[error("task {task}: UAV index {uav} repeated or out of range")]
    BadUav { task: usize, uav: usize },
    #[error("task order is not a permutation")]
    NotPermutation,
    #[error("UAV {uav}: GCS index out of range")]
    BadGcs { uav: usize },
    #[error("profile index out of range for UAV {uav}")]
    BadProfile { uav: usize },
}

impl Chromosome {
    /// Checks the shape invariants of the encoding against a planning context.
    ///
    /// Sensor validity is left to [`check_sensors`] so that hand-built
    /// chromosomes with a wrong sensor still decode.
    pub fn validate(&self, ctx: &PlanningContext) -> Result<(), StructureError> {
        let s = ctx.scenario();
        let (n, m) = (s.tasks.len(), s.uavs.len());
        let len = |allele, expected, found| {
            if expected == found {
                Ok(())
            } else {
                Err(StructureError::Length {
                    allele,
                    expected,
                    found,
                })
            }
        };
        len(1, n, self.assign.len())?;
        len(2, n, self.order.len())?;
        len(3, m, self.gcs.len())?;
        len(4, n, self.path_profile.len())?;
        len(5, n, self.sensor.len())?;
        len(6, m, self.return_profile.len())?;
        for (t, uavs) in self.assign.iter().enumerate() {
            let expected = s.tasks[t].required_uav_count();
            if uavs.len() != expected {
                return Err(StructureError::UavCount {
                    task: t,
                    expected,
                    found: uavs.len(),
                });
            }
            if self.path_profile[t].len() != uavs.len() || self.sensor[t].len() != uavs.len() {
                return Err(StructureError::SlotLength { task: t });
            }
            for (j, &u) in uavs.iter().enumerate() {
                if u >= m || uavs[..j].contains(&u) {
                    return Err(StructureError::BadUav { task: t, uav: u });
                }
                if self.path_profile[t][j] >= s.uavs[u].profiles.len() {
                    return Err(StructureError::BadProfile { uav: u });
                }
            }
        }
        let mut seen = vec![false; n];
        for &t in &self.order {
            if t >= n || seen[t] {
                return Err(StructureError::NotPermutation);
            }
            seen[t] = true;
        }
        for (u, g) in self.gcs.iter().enumerate() {
            if g.is_some_and(|g| g >= s.gcss.len()) {
                return Err(StructureError::BadGcs { uav: u });
            }
            if self.return_profile[u] >= s.uavs[u].profiles.len() {
                return Err(StructureError::BadProfile { uav: u });
            }
        }
        Ok(())
    }

    /// Tasks of `uav` in decoding order, with the UAV's slot in each task.
    pub fn tasks_of(&self, uav: usize) -> Vec<(usize, usize)> {
        self.order
            .iter()
            .filter_map(|&t| {
                self.assign[t]
                    .iter()
                    .position(|&u| u == uav)
                    .map(|slot| (t, slot))
            })
            .collect()
    }
}
