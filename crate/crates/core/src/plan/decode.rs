use serde::Serialize;
use thiserror::Error;

use super::{Chromosome, PlanningContext, StructureError};
use crate::scenario::{SensorKind, TaskKind, TimeWindow};

/// Time, fuel and distance quantities of one UAV flying to and executing one task.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct AssignmentTimes {
    pub departure: f64,
    pub dur_path: f64,
    pub start: f64,
    pub dur_task: f64,
    pub end: f64,
    pub dur_loiter: f64,
    pub fuel_path: f64,
    pub fuel_task: f64,
    pub fuel_loiter: f64,
    pub distance_path: f64,
    pub distance_task: f64,
    pub distance_loiter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskLeg {
    pub task: usize,
    /// Position of the leg in the UAV's sequence.
    pub order: usize,
    pub profile: usize,
    pub sensor: SensorKind,
    pub times: AssignmentTimes,
    /// Geometric execution time the task needs at the sensor speed, hours.
    pub required_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UavSchedule {
    pub uav: usize,
    pub gcs: Option<usize>,
    pub legs: Vec<TaskLeg>,
    pub return_profile: usize,
    pub dur_return: f64,
    pub return_time: f64,
    pub fuel_return: f64,
    pub distance_return: f64,
    pub flight_time: f64,
    pub total_distance: f64,
    pub total_fuel: f64,
}

impl UavSchedule {
    pub fn is_used(&self) -> bool {
        !self.legs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodedPlan {
    /// One schedule per UAV, in UAV index order.
    pub schedules: Vec<UavSchedule>,
    /// UAVs assigned to each task.
    pub task_uavs: Vec<Vec<usize>>,
}

impl DecodedPlan {
    /// (start, end) of every leg executing `task`.
    pub fn intervals(&self, task: usize) -> Vec<(f64, f64)> {
        self.task_uavs[task]
            .iter()
            .filter_map(|&u| self.schedules[u].legs.iter().find(|l| l.task == task))
            .map(|l| (l.times.start, l.times.end))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("malformed chromosome: {0}")]
    Structure(#[from] StructureError),
    #[error("no path from site {from} to site {to}")]
    NoPath { uav: usize, from: usize, to: usize },
}

impl PlanningContext {
    /// Appends the leg of `uav` executing `task` after the legs already in
    /// `legs`. `k` is the number of UAVs sharing the task.
    pub fn push_leg(
        &self,
        uav: usize,
        legs: &mut Vec<TaskLeg>,
        task: usize,
        k: usize,
        profile: usize,
        sensor: SensorKind,
    ) -> Result<(), DecodeError> {
        let s = self.scenario();
        let u = &s.uavs[uav];
        let t = &s.tasks[task];
        let prev = legs.last();
        let from = prev.map_or(self.base_site(uav), |l| self.exit_site(l.task));
        let to = self.entry_site(task);
        let path = self
            .path(from, to)
            .ok_or(DecodeError::NoPath { uav, from, to })?;
        let fp = &u.profiles[profile];
        let distance_path = path.path.length;
        let dur_path = distance_path / fp.speed;

        let geo = self.geometry(task);
        let v = u.optimum_speed(sensor);
        let required_time = match t.kind {
            TaskKind::Es => geo.route_length / v,
            TaskKind::Map => geo.sweep_length / (k as f64 * v),
            TaskKind::Mon | TaskKind::Tp => 0.0,
        };
        let dur_task = t.window.duration().unwrap_or(required_time);
        let prev_end = prev.map(|l| l.times.end);
        let (departure, start, end, dur_loiter) = match t.window {
            TimeWindow::Fixed { start, end } => {
                let departure = start - dur_path;
                let loiter = prev_end.map_or(0.0, |pe| (departure - pe).max(0.0));
                (departure, start, end, loiter)
            }
            TimeWindow::DurationOnly { .. } | TimeWindow::Free {} => {
                let departure = prev_end.unwrap_or(0.0);
                let start = departure + dur_path;
                (departure, start, start + dur_task, 0.0)
            }
        };
        let distance_task = match t.kind {
            TaskKind::Mon => v * dur_task,
            TaskKind::Es => geo.route_length,
            TaskKind::Tp => 0.0,
            TaskKind::Map => geo.sweep_length / k as f64,
        };
        let loiter_ratio = u.profiles[u.min_fuel_profile()].fuel_ratio;
        legs.push(TaskLeg {
            task,
            order: legs.len(),
            profile,
            sensor,
            required_time,
            times: AssignmentTimes {
                departure,
                dur_path,
                start,
                dur_task,
                end,
                dur_loiter,
                fuel_path: dur_path * fp.fuel_ratio,
                fuel_task: dur_task * fp.fuel_ratio,
                fuel_loiter: dur_loiter * loiter_ratio,
                distance_path,
                distance_task,
                distance_loiter: 0.0,
            },
        });
        Ok(())
    }

    /// Adds the return flight and the per-UAV totals.
    pub fn close_schedule(
        &self,
        uav: usize,
        gcs: Option<usize>,
        legs: Vec<TaskLeg>,
        return_profile: usize,
    ) -> Result<UavSchedule, DecodeError> {
        let u = &self.scenario().uavs[uav];
        let (mut dur_return, mut distance_return, mut fuel_return, mut return_time) =
            (0.0, 0.0, 0.0, 0.0);
        if let Some(last) = legs.last() {
            let from = self.exit_site(last.task);
            let to = self.base_site(uav);
            let path = self
                .path(from, to)
                .ok_or(DecodeError::NoPath { uav, from, to })?;
            let fp = &u.profiles[return_profile];
            distance_return = path.path.length;
            dur_return = distance_return / fp.speed;
            fuel_return = dur_return * fp.fuel_ratio;
            return_time = last.times.end + dur_return;
        }
        let sum = |f: fn(&AssignmentTimes) -> f64| legs.iter().map(|l| f(&l.times)).sum::<f64>();
        let flight_time = sum(|a| a.dur_path + a.dur_task + a.dur_loiter) + dur_return;
        let total_distance =
            sum(|a| a.distance_path + a.distance_task + a.distance_loiter) + distance_return;
        let total_fuel = sum(|a| a.fuel_path + a.fuel_task + a.fuel_loiter) + fuel_return;
        Ok(UavSchedule {
            uav,
            gcs,
            legs,
            return_profile,
            dur_return,
            return_time,
            fuel_return,
            distance_return,
            flight_time,
            total_distance,
            total_fuel,
        })
    }
}

/// Builds every UAV's schedule from a chromosome.
pub fn decode(ctx: &PlanningContext, c: &Chromosome) -> Result<DecodedPlan, DecodeError> {
    c.validate(ctx)?;
    let mut schedules = Vec::with_capacity(ctx.n_uavs());
    for u in 0..ctx.n_uavs() {
        let mut legs = Vec::new();
        for (t, slot) in c.tasks_of(u) {
            ctx.push_leg(
                u,
                &mut legs,
                t,
                c.assign[t].len(),
                c.path_profile[t][slot],
                c.sensor[t][slot],
            )?;
        }
        schedules.push(ctx.close_schedule(u, c.gcs[u], legs, c.return_profile[u])?);
    }
    Ok(DecodedPlan {
        schedules,
        task_uavs: c.assign.clone(),
    })
}
