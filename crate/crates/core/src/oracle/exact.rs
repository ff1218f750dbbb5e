//! Exact Pareto front by decomposed branch and bound.
//!
//! The search has three levels:
//! 1. UAV sets per task (respecting same/different-UAV dependencies);
//! 2. for every (UAV, task set), all sequences, profiles and sensors of that
//!    UAV, grouped by what the other UAVs need to know about them (shared
//!    task order, usable GCSs, intervals of dependency tasks) and reduced to
//!    a Pareto set per group; this level is memoized;
//! 3. one group per UAV, checked for the global constraints and merged.
//!
//! Level 3 prunes a partial combination when its lower bound is weakly
//! dominated by the incumbent front. Every result is rebuilt as a chromosome
//! and re-evaluated so that reported vectors are exactly the evaluator's.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::objectives::{
    compute_objectives, dominates_slice, Objective, ObjectiveSelection, ObjectiveVector,
};
use crate::plan::{evaluate, Chromosome, PlanningContext, ResolvedDependency, TaskLeg};
use crate::scenario::{SensorKind, TimeWindow};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search budget of {budget} nodes exceeded")]
    BudgetExceeded { budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactFront {
    pub selection: ObjectiveSelection,
    /// Non-dominated feasible vectors, one per distinct selected projection.
    pub points: Vec<ObjectiveVector>,
    /// A chromosome achieving each point.
    pub witnesses: Vec<Chromosome>,
    /// Search nodes visited.
    pub nodes: u64,
}

impl ExactFront {
    pub fn projected(&self) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .map(|p| self.selection.project(p))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    pub budget: u64,
    /// Dominance pruning; disabling it enumerates every feasible combination.
    pub prune: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            prune: true,
        }
    }
}

/// One way a UAV can fly a given task set.
#[derive(Debug, Clone)]
struct UavOption {
    contrib: [f64; 6],
    legs: Vec<(usize, usize, SensorKind)>,
    ret: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Signature {
    shared: Vec<usize>,
    gcs_mask: u64,
    intervals: Vec<(usize, u64, u64)>,
}

#[derive(Debug, Clone)]
struct Group {
    sig: Signature,
    options: Vec<UavOption>,
    min: [f64; 6],
}

struct Search<'a> {
    ctx: &'a PlanningContext,
    dims: Vec<usize>,
    opts: OracleOptions,
    nodes: u64,
    memo: HashMap<(usize, u64), Vec<Group>>,
    shared_tasks: u64,
    dep_tasks: u64,
    /// Distinct-speed sensors per (task, uav).
    sensor_reps: Vec<Vec<Vec<SensorKind>>>,
    front: Vec<Candidate>,
}

#[derive(Debug, Clone)]
struct Candidate {
    value: [f64; 6],
    assign: Vec<Vec<usize>>,
    picks: Vec<(usize, UavOption)>,
    gcs: Vec<usize>,
}

fn combine(a: &[f64; 6], b: &[f64; 6]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for k in 0..5 {
        out[k] = a[k] + b[k];
    }
    out[5] = a[5].max(b[5]);
    out
}

fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

const EPS: f64 = 1e-9;

fn leq(a: f64, b: f64) -> bool {
    a <= b || (a - b).abs() <= EPS * a.abs().max(b.abs()).max(1.0)
}

impl<'a> Search<'a> {
    fn tick(&mut self, n: u64) -> Result<(), OracleError> {
        self.nodes += n;
        if self.nodes > self.opts.budget {
            Err(OracleError::BudgetExceeded {
                budget: self.opts.budget,
            })
        } else {
            Ok(())
        }
    }

    fn project(&self, v: &[f64; 6]) -> Vec<f64> {
        self.dims.iter().map(|&d| v[d]).collect()
    }

    /// Filters `items` to the Pareto set of their selected projections,
    /// keeping the first of equal projections.
    fn pareto<T>(&self, items: Vec<T>, value: impl Fn(&T) -> [f64; 6]) -> Vec<T> {
        if !self.opts.prune {
            return items;
        }
        let mut kept: Vec<(Vec<f64>, T)> = Vec::new();
        for it in items {
            let p = self.project(&value(&it));
            if kept.iter().any(|(q, _)| weakly_dominates(q, &p)) {
                continue;
            }
            kept.retain(|(q, _)| !dominates_slice(&p, q));
            kept.push((p, it));
        }
        kept.into_iter().map(|(_, it)| it).collect()
    }

    // Level 2 -----------------------------------------------------------

    fn groups(&mut self, uav: usize, mask: u64) -> Result<(), OracleError> {
        if self.memo.contains_key(&(uav, mask)) {
            return Ok(());
        }
        let tasks: Vec<usize> = (0..self.ctx.n_tasks())
            .filter(|t| mask >> t & 1 == 1)
            .collect();
        let mut by_sig: BTreeMap<Signature, Vec<UavOption>> = BTreeMap::new();
        let mut legs = Vec::with_capacity(tasks.len());
        let mut picks = Vec::with_capacity(tasks.len());
        self.sequences(uav, &tasks, 0, &mut legs, &mut picks, &mut by_sig)?;
        let groups = by_sig
            .into_iter()
            .map(|(sig, options)| {
                let options = self.pareto(options, |o| o.contrib);
                let mut min = [f64::INFINITY; 6];
                for o in &options {
                    for (m, c) in min.iter_mut().zip(o.contrib) {
                        *m = m.min(c);
                    }
                }
                Group { sig, options, min }
            })
            .collect();
        self.memo.insert((uav, mask), groups);
        Ok(())
    }

    fn sequences(
        &mut self,
        uav: usize,
        tasks: &[usize],
        used: u64,
        legs: &mut Vec<TaskLeg>,
        picks: &mut Vec<(usize, usize, SensorKind)>,
        out: &mut BTreeMap<Signature, Vec<UavOption>>,
    ) -> Result<(), OracleError> {
        let ctx = self.ctx;
        let s = ctx.scenario();
        let u = &s.uavs[uav];
        if legs.len() == tasks.len() {
            for ret in 0..u.profiles.len() {
                self.tick(1)?;
                let Ok(sched) = ctx.close_schedule(uav, None, legs.clone(), ret) else {
                    continue;
                };
                if sched.flight_time >= u.autonomy
                    || sched.total_distance >= u.range
                    || sched.total_fuel >= u.initial_fuel
                {
                    continue;
                }
                let mut gcs_mask = 0u64;
                for (g, gcs) in s.gcss.iter().enumerate() {
                    if gcs.permitted_types.contains(&u.uav_type)
                        && crate::plan::uav_reach(ctx, &sched, g) <= gcs.coverage
                    {
                        gcs_mask |= 1 << g;
                    }
                }
                if gcs_mask == 0 {
                    continue;
                }
                let sig = Signature {
                    shared: legs
                        .iter()
                        .map(|l| l.task)
                        .filter(|t| self.shared_tasks >> t & 1 == 1)
                        .collect(),
                    gcs_mask,
                    intervals: {
                        let mut iv: Vec<_> = legs
                            .iter()
                            .filter(|l| self.dep_tasks >> l.task & 1 == 1)
                            .map(|l| (l.task, l.times.start.to_bits(), l.times.end.to_bits()))
                            .collect();
                        iv.sort_unstable();
                        iv
                    },
                };
                let contrib = [
                    1.0,
                    sched.flight_time,
                    sched.total_fuel,
                    sched.total_distance,
                    u.cost_per_hour * sched.flight_time,
                    sched.return_time,
                ];
                out.entry(sig).or_default().push(UavOption {
                    contrib,
                    legs: picks.clone(),
                    ret,
                });
            }
            return Ok(());
        }
        for (i, &t) in tasks.iter().enumerate() {
            if used >> i & 1 == 1 {
                continue;
            }
            let k = s.tasks[t].required_uav_count();
            for p in 0..u.profiles.len() {
                for si in 0..self.sensor_reps[t][uav].len() {
                    let sensor = self.sensor_reps[t][uav][si];
                    self.tick(1)?;
                    if ctx.push_leg(uav, legs, t, k, p, sensor).is_err() {
                        continue;
                    }
                    if self.prefix_ok(uav, legs) {
                        picks.push((t, p, sensor));
                        self.sequences(uav, tasks, used | 1 << i, legs, picks, out)?;
                        picks.pop();
                    }
                    legs.pop();
                }
            }
        }
        Ok(())
    }

    /// Constraints on the newest leg that no continuation can repair.
    fn prefix_ok(&self, uav: usize, legs: &[TaskLeg]) -> bool {
        let s = self.ctx.scenario();
        let u = &s.uavs[uav];
        let leg = legs.last().expect("non-empty");
        let a = &leg.times;
        if a.departure < -EPS {
            return false;
        }
        if !matches!(s.tasks[leg.task].window, TimeWindow::Free {})
            && !leq(leg.required_time, a.dur_task)
        {
            return false;
        }
        if legs.len() > 1 && !leq(legs[legs.len() - 2].times.end, a.departure) {
            return false;
        }
        let (mut time, mut dist, mut fuel) = (0.0, 0.0, 0.0);
        for l in legs {
            let a = &l.times;
            time += a.dur_path + a.dur_task + a.dur_loiter;
            dist += a.distance_path + a.distance_task + a.distance_loiter;
            fuel += a.fuel_path + a.fuel_task + a.fuel_loiter;
        }
        time < u.autonomy && dist < u.range && fuel < u.initial_fuel
    }

    // Level 1 -----------------------------------------------------------

    fn assignments(&mut self, t: usize, assign: &mut Vec<Vec<usize>>) -> Result<(), OracleError> {
        self.tick(1)?;
        let n = self.ctx.n_tasks();
        if t == n {
            return self.combine_uavs(assign);
        }
        let k = self.ctx.scenario().tasks[t].required_uav_count();
        let pool = self.ctx.compatible_uavs(t).to_vec();
        for set in subsets(&pool, k) {
            assign.push(set);
            if self.assignment_deps_ok(assign) {
                self.assignments(t + 1, assign)?;
            }
            assign.pop();
        }
        Ok(())
    }

    fn assignment_deps_ok(&self, assign: &[Vec<usize>]) -> bool {
        let t = assign.len() - 1;
        self.ctx.dependencies().iter().all(|d| match *d {
            ResolvedDependency::SameUav(i, j) if i.max(j) == t => {
                let mut a = assign[i].clone();
                let mut b = assign[j].clone();
                a.sort_unstable();
                b.sort_unstable();
                a == b
            }
            ResolvedDependency::DiffUav(i, j) if i.max(j) == t => {
                !assign[i].iter().any(|u| assign[j].contains(u))
            }
            _ => true,
        })
    }

    // Level 3 -----------------------------------------------------------

    fn combine_uavs(&mut self, assign: &[Vec<usize>]) -> Result<(), OracleError> {
        let m = self.ctx.n_uavs();
        let mut masks = vec![0u64; m];
        for (t, set) in assign.iter().enumerate() {
            for &u in set {
                masks[u] |= 1 << t;
            }
        }
        let used: Vec<usize> = (0..m).filter(|&u| masks[u] != 0).collect();
        for &u in &used {
            self.groups(u, masks[u])?;
            if self.memo[&(u, masks[u])].is_empty() {
                return Ok(());
            }
        }
        let keys: Vec<(usize, u64)> = used.iter().map(|&u| (u, masks[u])).collect();
        // Best case of the UAVs not yet chosen, from the back.
        let mut rest = vec![[0.0; 6]; keys.len() + 1];
        for i in (0..keys.len()).rev() {
            let mut best = [f64::INFINITY; 6];
            for g in &self.memo[&keys[i]] {
                for (b, m) in best.iter_mut().zip(g.min) {
                    *b = b.min(m);
                }
            }
            rest[i] = combine(&rest[i + 1], &best);
        }
        let mut chosen = Vec::with_capacity(keys.len());
        self.choose(assign, &keys, &rest, &mut chosen, [0.0; 6])
    }

    fn choose(
        &mut self,
        assign: &[Vec<usize>],
        keys: &[(usize, u64)],
        rest: &[[f64; 6]],
        chosen: &mut Vec<usize>,
        lb: [f64; 6],
    ) -> Result<(), OracleError> {
        self.tick(1)?;
        let i = chosen.len();
        if self.opts.prune {
            let bound = self.project(&combine(&lb, &rest[i]));
            if self
                .front
                .iter()
                .any(|c| weakly_dominates(&self.project(&c.value), &bound))
            {
                return Ok(());
            }
        }
        if i == keys.len() {
            return self.leaf(assign, keys, chosen);
        }
        let n_groups = self.memo[&keys[i]].len();
        for gi in 0..n_groups {
            let gmin = self.memo[&keys[i]][gi].min;
            chosen.push(gi);
            self.choose(assign, keys, rest, chosen, combine(&lb, &gmin))?;
            chosen.pop();
        }
        Ok(())
    }

    fn leaf(
        &mut self,
        assign: &[Vec<usize>],
        keys: &[(usize, u64)],
        chosen: &[usize],
    ) -> Result<(), OracleError> {
        let groups: Vec<&Group> = keys
            .iter()
            .zip(chosen)
            .map(|(k, &g)| &self.memo[k][g])
            .collect();
        let n = self.ctx.n_tasks();
        if !acyclic(n, groups.iter().map(|g| g.sig.shared.as_slice())) {
            return Ok(());
        }
        let mut intervals: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n];
        for g in &groups {
            for &(t, s, e) in &g.sig.intervals {
                intervals[t].push((f64::from_bits(s), f64::from_bits(e)));
            }
        }
        for d in self.ctx.dependencies() {
            if let ResolvedDependency::Time(i, j, rel) = *d {
                if !intervals[i]
                    .iter()
                    .all(|a| intervals[j].iter().all(|b| rel.holds(*a, *b)))
                {
                    return Ok(());
                }
            }
        }
        let caps: Vec<usize> = self
            .ctx
            .scenario()
            .gcss
            .iter()
            .map(|g| g.max_uavs - 1)
            .collect();
        let Some(gcs) = match_gcs(
            &groups.iter().map(|g| g.sig.gcs_mask).collect::<Vec<_>>(),
            &caps,
        ) else {
            return Ok(());
        };

        // Merge the per-UAV Pareto sets.
        let mut acc: Vec<([f64; 6], Vec<usize>)> = vec![([0.0; 6], Vec::new())];
        for g in &groups {
            let pairs = acc.len() as u64 * g.options.len() as u64;
            let mut next = Vec::with_capacity(pairs as usize);
            for (v, picks) in &acc {
                for (oi, o) in g.options.iter().enumerate() {
                    let mut p = picks.clone();
                    p.push(oi);
                    next.push((combine(v, &o.contrib), p));
                }
            }
            acc = self.pareto(next, |x| x.0);
            self.nodes += pairs;
        }
        if self.nodes > self.opts.budget {
            return Err(OracleError::BudgetExceeded {
                budget: self.opts.budget,
            });
        }
        let cands: Vec<Candidate> = acc
            .into_iter()
            .filter(|(v, _)| self.front_accepts(v))
            .map(|(value, picks)| Candidate {
                value,
                assign: assign.to_vec(),
                picks: keys
                    .iter()
                    .zip(&groups)
                    .zip(&picks)
                    .map(|((k, g), &oi)| (k.0, g.options[oi].clone()))
                    .collect(),
                gcs: gcs.clone(),
            })
            .collect();
        for cand in cands {
            if self.front_accepts(&cand.value) {
                self.insert(cand);
            }
        }
        Ok(())
    }

    fn front_accepts(&self, v: &[f64; 6]) -> bool {
        let p = self.project(v);
        !self
            .front
            .iter()
            .any(|c| weakly_dominates(&self.project(&c.value), &p))
    }

    fn insert(&mut self, cand: Candidate) {
        let p = self.project(&cand.value);
        let dims = self.dims.clone();
        self.front.retain(|c| {
            let q: Vec<f64> = dims.iter().map(|&d| c.value[d]).collect();
            !dominates_slice(&p, &q)
        });
        self.front.push(cand);
    }
}

/// All `k`-subsets of `pool`, in lexicographic order.
fn subsets(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(
        pool: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            rec(pool, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(pool, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Whether per-UAV orders over shared tasks admit a common total order.
fn acyclic<'s>(n: usize, orders: impl Iterator<Item = &'s [usize]>) -> bool {
    let mut succ = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for o in orders {
        for w in o.windows(2) {
            succ[w[0]].push(w[1]);
            indeg[w[1]] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&t| indeg[t] == 0).collect();
    let mut seen = 0;
    while let Some(t) = stack.pop() {
        seen += 1;
        for &v in &succ[t] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                stack.push(v);
            }
        }
    }
    seen == n
}

/// Assigns each UAV a GCS from its mask without exceeding `caps`.
fn match_gcs(masks: &[u64], caps: &[usize]) -> Option<Vec<usize>> {
    fn rec(
        i: usize,
        masks: &[u64],
        load: &mut [usize],
        caps: &[usize],
        out: &mut Vec<usize>,
    ) -> bool {
        if i == masks.len() {
            return true;
        }
        for g in 0..caps.len() {
            if masks[i] >> g & 1 == 1 && load[g] < caps[g] {
                load[g] += 1;
                out.push(g);
                if rec(i + 1, masks, load, caps, out) {
                    return true;
                }
                out.pop();
                load[g] -= 1;
            }
        }
        false
    }
    let mut load = vec![0; caps.len()];
    let mut out = Vec::new();
    rec(0, masks, &mut load, caps, &mut out).then_some(out)
}

fn witness(ctx: &PlanningContext, cand: &Candidate) -> Chromosome {
    let (n, m) = (ctx.n_tasks(), ctx.n_uavs());
    let mut c = Chromosome {
        assign: cand.assign.clone(),
        order: Vec::with_capacity(n),
        gcs: vec![Some(0); m],
        path_profile: cand.assign.iter().map(|s| vec![0; s.len()]).collect(),
        sensor: cand
            .assign
            .iter()
            .enumerate()
            .map(|(t, s)| vec![ctx.scenario().tasks[t].compatible_sensors()[0]; s.len()])
            .collect(),
        return_profile: vec![0; m],
    };
    let mut succ = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for (i, (u, opt)) in cand.picks.iter().enumerate() {
        c.gcs[*u] = Some(cand.gcs[i]);
        c.return_profile[*u] = opt.ret;
        for &(t, p, s) in &opt.legs {
            let slot = cand.assign[t]
                .iter()
                .position(|x| x == u)
                .expect("assigned");
            c.path_profile[t][slot] = p;
            c.sensor[t][slot] = s;
        }
        for w in opt.legs.windows(2) {
            succ[w[0].0].push(w[1].0);
            indeg[w[1].0] += 1;
        }
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&t| indeg[t] == 0).collect();
    while let Some(t) = ready.pop_first() {
        c.order.push(t);
        for &v in &succ[t] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.insert(v);
            }
        }
    }
    c
}

/// Exact set of non-dominated feasible objective vectors.
pub fn exact_pof(
    ctx: &PlanningContext,
    sel: &ObjectiveSelection,
    options: OracleOptions,
) -> Result<ExactFront, OracleError> {
    let s = ctx.scenario();
    let n = s.tasks.len();
    let mut shared_tasks = 0u64;
    for (t, task) in s.tasks.iter().enumerate() {
        if task.required_uav_count() > 1 {
            shared_tasks |= 1 << t;
        }
    }
    let mut dep_tasks = 0u64;
    for d in ctx.dependencies() {
        if let ResolvedDependency::Time(i, j, _) = *d {
            dep_tasks |= 1 << i | 1 << j;
        }
    }
    let sensor_reps = (0..n)
        .map(|t| {
            (0..s.uavs.len())
                .map(|u| {
                    let mut reps: Vec<SensorKind> = Vec::new();
                    for &sk in ctx.valid_sensors(t, u) {
                        let v = s.uavs[u].optimum_speed(sk);
                        if !reps.iter().any(|r| s.uavs[u].optimum_speed(*r) == v) {
                            reps.push(sk);
                        }
                    }
                    reps
                })
                .collect()
        })
        .collect();
    let mut search = Search {
        ctx,
        dims: sel
            .objectives()
            .iter()
            .map(|o| Objective::ALL.iter().position(|x| x == o).unwrap())
            .collect(),
        opts: options,
        nodes: 0,
        memo: HashMap::new(),
        shared_tasks,
        dep_tasks,
        sensor_reps,
        front: Vec::new(),
    };
    search.assignments(0, &mut Vec::new())?;

    let mut points: Vec<(Vec<f64>, ObjectiveVector, Chromosome)> = Vec::new();
    for cand in &search.front {
        let c = witness(ctx, cand);
        let eval = evaluate(ctx, &c);
        let plan = eval
            .plan
            .as_ref()
            .unwrap_or_else(|| panic!("oracle witness rejected: {:?}", eval.report.violations));
        let v = compute_objectives(s, plan);
        debug_assert!(v
            .to_array()
            .iter()
            .zip(cand.value)
            .all(|(a, b)| (a - b).abs() <= 1e-6 * a.abs().max(1.0)));
        let p = sel.project(&v);
        if points.iter().any(|(q, _, _)| weakly_dominates(q, &p)) {
            continue;
        }
        points.retain(|(q, _, _)| !dominates_slice(&p, q));
        points.push((p, v, c));
    }
    points.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(ExactFront {
        selection: sel.clone(),
        points: points.iter().map(|p| p.1).collect(),
        witnesses: points.into_iter().map(|p| p.2).collect(),
        nodes: search.nodes,
    })
}
