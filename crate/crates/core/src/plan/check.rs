use serde::Serialize;

use super::context::ResolvedDependency;
use super::{decode, Chromosome, DecodeError, DecodedPlan, PlanningContext, UavSchedule};
use crate::scenario::TimeWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConstraintFamily {
    Sensor,
    Order,
    Gcs,
    Temporal,
    Dependency,
    Autonomy,
    Distance,
    Fuel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ViolationCode {
    MalformedChromosome,
    SensorMismatch,
    OrderIndex,
    GcsUnassigned,
    GcsType,
    GcsCapacity,
    GcsCoverage,
    Overlap,
    DepartureBeforeMissionStart,
    ExecutionTime,
    Identity,
    TimeRelation,
    SameUav,
    DiffUav,
    Autonomy,
    Range,
    Fuel,
    NoPath,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub code: ViolationCode,
    pub detail: String,
}

impl Violation {
    fn new(family: ConstraintFamily, code: ViolationCode, detail: impl Into<String>) -> Self {
        Self {
            family,
            code,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ConstraintReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            feasible: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, family: ConstraintFamily) -> bool {
        self.violations.iter().any(|v| v.family == family)
    }

    pub fn has_code(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

/// Result of the two-step fitness gate: constraints first, plan only when feasible.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: ConstraintReport,
    pub plan: Option<DecodedPlan>,
}

const REL_EPS: f64 = 1e-9;

fn approx(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_EPS * a.abs().max(b.abs()).max(1.0)
}

fn leq(a: f64, b: f64) -> bool {
    a <= b || approx(a, b)
}

pub fn check_sensors(ctx: &PlanningContext, plan: &DecodedPlan) -> Vec<Violation> {
    let s = ctx.scenario();
    let mut out = Vec::new();
    for sched in &plan.schedules {
        for leg in &sched.legs {
            let valid = ctx.valid_sensors(leg.task, sched.uav);
            if !valid.contains(&leg.sensor) {
                out.push(Violation::new(
                    ConstraintFamily::Sensor,
                    ViolationCode::SensorMismatch,
                    format!(
                        "uav `{}` cannot perform task `{}` with {:?}",
                        s.uavs[sched.uav].id, s.tasks[leg.task].id, leg.sensor
                    ),
                ));
            }
        }
    }
    out
}

pub fn check_order(ctx: &PlanningContext, plan: &DecodedPlan) -> Vec<Violation> {
    let mut out = Vec::new();
    for sched in &plan.schedules {
        let k = sched.legs.len();
        let mut seen = vec![false; k];
        for leg in &sched.legs {
            if leg.order >= k || seen[leg.order] {
                out.push(Violation::new(
                    ConstraintFamily::Order,
                    ViolationCode::OrderIndex,
                    format!(
                        "uav `{}`: order {} invalid among {k} legs",
                        ctx.scenario().uavs[sched.uav].id,
                        leg.order
                    ),
                ));
            } else {
                seen[leg.order] = true;
            }
        }
    }
    out
}

/// Farthest distance from GCS `g` over the UAV's paths and task zones.
pub fn uav_reach(ctx: &PlanningContext, sched: &UavSchedule, g: usize) -> f64 {
    let mut reach: f64 = 0.0;
    let mut from = ctx.base_site(sched.uav);
    for leg in &sched.legs {
        if let Some(p) = ctx.path(from, ctx.entry_site(leg.task)) {
            reach = reach.max(p.reach[g]);
        }
        reach = reach.max(ctx.zone_reach(leg.task)[g]);
        from = ctx.exit_site(leg.task);
    }
    if let Some(p) = ctx.path(from, ctx.base_site(sched.uav)) {
        reach = reach.max(p.reach[g]);
    }
    reach
}

/// GCS rules apply to UAVs that fly at least one task.
pub fn check_gcs(ctx: &PlanningContext, plan: &DecodedPlan) -> Vec<Violation> {
    use ViolationCode::*;
    let s = ctx.scenario();
    let mut out = Vec::new();
    let mut load = vec![0usize; s.gcss.len()];
    for sched in plan.schedules.iter().filter(|x| x.is_used()) {
        let u = &s.uavs[sched.uav];
        let Some(g) = sched.gcs else {
            out.push(Violation::new(
                ConstraintFamily::Gcs,
                GcsUnassigned,
                format!("uav `{}` has no GCS", u.id),
            ));
            continue;
        };
        let gcs = &s.gcss[g];
        load[g] += 1;
        if !gcs.permitted_types.contains(&u.uav_type) {
            out.push(Violation::new(
                ConstraintFamily::Gcs,
                GcsType,
                format!("gcs `{}` cannot control {} `{}`", gcs.id, u.uav_type, u.id),
            ));
        }
        let reach = uav_reach(ctx, sched, g);
        if reach > gcs.coverage {
            out.push(Violation::new(
                ConstraintFamily::Gcs,
                GcsCoverage,
                format!("uav `{}` reaches {reach:.3} NM from gcs `{}`", u.id, gcs.id),
            ));
        }
    }
    for (g, &count) in load.iter().enumerate() {
        if count >= s.gcss[g].max_uavs {
            out.push(Violation::new(
                ConstraintFamily::Gcs,
                GcsCapacity,
                format!(
                    "gcs `{}` controls {count} UAVs, must stay below {}",
                    s.gcss[g].id, s.gcss[g].max_uavs
                ),
            ));
        }
    }
    out
}

pub fn check_temporal(ctx: &PlanningContext, plan: &DecodedPlan) -> Vec<Violation> {
    use ViolationCode::*;
    let s = ctx.scenario();
    let mut out = Vec::new();
    let temporal = |code, detail: String| Violation::new(ConstraintFamily::Temporal, code, detail);
    for sched in &plan.schedules {
        let u = &s.uavs[sched.uav];
        for (i, leg) in sched.legs.iter().enumerate() {
            let a = &leg.times;
            let task = &s.tasks[leg.task];
            let what = || format!("uav `{}` task `{}`", u.id, task.id);
            if a.departure < -REL_EPS {
                out.push(temporal(
                    DepartureBeforeMissionStart,
                    format!("{}: departs at {:.4} h", what(), a.departure),
                ));
            }
            if !matches!(task.window, TimeWindow::Free {}) && !leq(leg.required_time, a.dur_task) {
                out.push(temporal(
                    ExecutionTime,
                    format!(
                        "{}: needs {:.4} h in a {:.4} h window",
                        what(),
                        leg.required_time,
                        a.dur_task
                    ),
                ));
            }
            if i > 0 {
                let prev = &sched.legs[i - 1].times;
                if !leq(prev.end, a.departure) {
                    out.push(temporal(
                        Overlap,
                        format!(
                            "{}: departs at {:.4} h before previous end {:.4} h",
                            what(),
                            a.departure,
                            prev.end
                        ),
                    ));
                } else if task.window.is_fixed() && !approx(a.dur_loiter, a.departure - prev.end) {
                    out.push(temporal(Identity, format!("{}: loiter mismatch", what())));
                }
            }
            let speed = u.profiles[leg.profile].speed;
            let identities = approx(a.start, a.departure + a.dur_path)
                && approx(a.end, a.start + a.dur_task)
                && approx(a.dur_path * speed, a.distance_path)
                && [a.dur_path, a.dur_task, a.dur_loiter]
                    .iter()
                    .all(|d| *d >= 0.0);
            if !identities {
                out.push(temporal(
                    Identity,
                    format!("{}: time identities do not hold", what()),
                ));
            }
        }
        if let Some(last) = sched.legs.last() {
            let speed = u.profiles[sched.return_profile].speed;
            if !approx(sched.return_time, last.times.end + sched.dur_return)
                || !approx(sched.dur_return * speed, sched.distance_return)
            {
                out.push(temporal(
                    Identity,
                    format!("uav `{}`: return identities do not hold", u.id),
                ));
            }
        }
    }
    out
}

pub fn check_dependencies(ctx: &PlanningContext, plan: &DecodedPlan) -> Vec<Violation> {
    use ViolationCode::*;
    let s = ctx.scenario();
    let mut out = Vec::new();
    let dep = |code, detail: String| Violation::new(ConstraintFamily::Dependency, code, detail);
    for d in ctx.dependencies() {
        match *d {
            ResolvedDependency::Time(i, j, rel) => {
                let (ii, jj) = (plan.intervals(i), plan.intervals(j));
                let ok = ii.iter().all(|a| jj.iter().all(|b| rel.holds(*a, *b)));
                if !ok {
                    out.push(dep(
                        TimeRelation,
                        format!(
                            "`{}` {rel:?} `{}` does not hold",
                            s.tasks[i].id, s.tasks[j].id
                        ),
                    ));
                }
            }
            ResolvedDependency::SameUav(i, j) => {
                let mut a = plan.task_uavs[i].clone();
                let mut b = plan.task_uavs[j].clone();
                a.sort_unstable();
                b.sort_unstable();
                if a != b {
                    out.push(dep(
                        SameUav,
                        format!(
                            "`{}` and `{}` need the same UAVs",
                            s.tasks[i].id, s.tasks[j].id
                        ),
                    ));
                }
            }
            ResolvedDependency::DiffUav(i, j) => {
                if plan.task_uavs[i]
                    .iter()
                    .any(|u| plan.task_uavs[j].contains(u))
                {
                    out.push(dep(
                        DiffUav,
                        format!("`{}` and `{}` share a UAV", s.tasks[i].id, s.tasks[j].id),
                    ));
                }
            }
        }
    }
    out
}

pub fn check_resources(ctx: &PlanningContext, plan: &DecodedPlan) -> Vec<Violation> {
    let s = ctx.scenario();
    let mut out = Vec::new();
    for sched in &plan.schedules {
        let u = &s.uavs[sched.uav];
        if sched.flight_time >= u.autonomy {
            out.push(Violation::new(
                ConstraintFamily::Autonomy,
                ViolationCode::Autonomy,
                format!(
                    "uav `{}` flies {:.3} h, autonomy {} h",
                    u.id, sched.flight_time, u.autonomy
                ),
            ));
        }
        if sched.total_distance >= u.range {
            out.push(Violation::new(
                ConstraintFamily::Distance,
                ViolationCode::Range,
                format!(
                    "uav `{}` covers {:.3} NM, range {} NM",
                    u.id, sched.total_distance, u.range
                ),
            ));
        }
        if sched.total_fuel >= u.initial_fuel {
            out.push(Violation::new(
                ConstraintFamily::Fuel,
                ViolationCode::Fuel,
                format!(
                    "uav `{}` burns {:.3} kg of {} kg",
                    u.id, sched.total_fuel, u.initial_fuel
                ),
            ));
        }
    }
    out
}

/// All constraint checks over a decoded plan.
pub fn check_plan(ctx: &PlanningContext, plan: &DecodedPlan) -> ConstraintReport {
    let mut v = check_sensors(ctx, plan);
    v.extend(check_order(ctx, plan));
    v.extend(check_gcs(ctx, plan));
    v.extend(check_temporal(ctx, plan));
    v.extend(check_dependencies(ctx, plan));
    v.extend(check_resources(ctx, plan));
    ConstraintReport::from_violations(v)
}

/// Decodes and checks a chromosome; the plan is kept only when feasible.
pub fn evaluate(ctx: &PlanningContext, c: &Chromosome) -> Evaluation {
    match decode(ctx, c) {
        Ok(plan) => {
            let report = check_plan(ctx, &plan);
            let plan = report.feasible.then_some(plan);
            Evaluation { report, plan }
        }
        Err(e) => {
            let (family, code) = match e {
                DecodeError::Structure(_) => {
                    (ConstraintFamily::Order, ViolationCode::MalformedChromosome)
                }
                DecodeError::NoPath { .. } => (ConstraintFamily::Distance, ViolationCode::NoPath),
            };
            Evaluation {
                report: ConstraintReport::from_violations(vec![Violation::new(
                    family,
                    code,
                    e.to_string(),
                )]),
                plan: None,
            }
        }
    }
}
