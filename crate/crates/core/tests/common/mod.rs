//! Fixtures shared by the integration tests: tiny generated scenarios, an
//! exhaustive chromosome enumerator and an independent plan checker that
//! recomputes every schedule quantity from scratch (straight-line paths, so
//! it only applies to scenarios without no-fly zones).
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uavplan_core::dataset::{generate_dataset, DatasetRecipe, TaskMix, UavMix};
use uavplan_core::objectives::ObjectiveSelection;
use uavplan_core::scenario::{
    catalog_uav, effective_sensors, AllenRelation, Dependency, FlightProfile, GcsSpec, GeoPoint,
    MissionScenario, ProfileKind, Region, SensorKind, TaskKind, TaskSpec, TimeWindow, UavSpec,
    UavType, Zone,
};
use uavplan_core::{evaluate, objectives::objectives_of, Chromosome, PlanningContext};

pub fn recipe(
    name: &str,
    tasks: [usize; 4],
    uavs: [usize; 4],
    fixed: usize,
    deps: usize,
    seed: u64,
) -> DatasetRecipe {
    let total: usize = tasks.iter().sum();
    DatasetRecipe {
        name: name.into(),
        tasks: TaskMix {
            mon: tasks[0],
            es: tasks[1],
            tp: tasks[2],
            map: tasks[3],
        },
        uavs: UavMix {
            urav: uavs[0],
            male: uavs[1],
            hale: uavs[2],
            ucav: uavs[3],
        },
        gcs_count: 1,
        nfz_count: 0,
        fixed_count: fixed,
        unfixed_count: total - fixed,
        dependency_count: deps,
        multi_uav_count: 0,
        seed,
    }
}

/// `count` scenarios with 2-4 fixed-window tasks, 2-3 UAVs and one GCS.
pub fn tiny_fixed_scenarios(count: usize, master: u64) -> Vec<MissionScenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.random_range(2..=4);
        let mut tasks = [0usize; 4];
        for _ in 0..n {
            tasks[rng.random_range(0..3)] += 1;
        }
        let m = rng.random_range(2..=3);
        let mut uavs = [0usize; 4];
        for _ in 0..m {
            uavs[rng.random_range(0..4)] += 1;
        }
        let r = recipe(
            &format!("tiny-{}", out.len() + 1),
            tasks,
            uavs,
            n,
            0,
            rng.random(),
        );
        if let Ok(s) = generate_dataset(&r) {
            out.push(s);
        }
    }
    out
}

fn profile_choices(u: &UavSpec) -> Vec<usize> {
    (0..u.profiles.len()).collect()
}

/// Ordered UAV tuples of size `k` with distinct members.
fn tuples(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in tuples(m, k - 1) {
        for u in 0..m {
            if !rest.contains(&u) {
                let mut t = rest.clone();
                t.push(u);
                out.push(t);
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Per-task allele options: (uavs, profiles, sensors).
type TaskOption = (Vec<usize>, Vec<usize>, Vec<SensorKind>);

fn task_options(
    s: &MissionScenario,
    t: usize,
    sensors: &dyn Fn(usize, usize) -> Vec<SensorKind>,
) -> Vec<TaskOption> {
    let k = s.tasks[t].required_uav_count();
    let mut out = Vec::new();
    for uavs in tuples(s.uavs.len(), k) {
        let mut partial: Vec<(Vec<usize>, Vec<SensorKind>)> = vec![(vec![], vec![])];
        for &u in &uavs {
            let mut next = Vec::new();
            for (ps, ss) in &partial {
                for p in profile_choices(&s.uavs[u]) {
                    for sk in sensors(t, u) {
                        let mut ps = ps.clone();
                        let mut ss = ss.clone();
                        ps.push(p);
                        ss.push(sk);
                        next.push((ps, ss));
                    }
                }
            }
            partial = next;
        }
        for (ps, ss) in partial {
            out.push((uavs.clone(), ps, ss));
        }
    }
    out
}

/// Every chromosome of a small scenario. With `any_sensor` the sensor allele
/// ranges over every sensor the UAV effectively offers instead of the valid
/// ones only.
pub fn enumerate_chromosomes(ctx: &PlanningContext, any_sensor: bool) -> Vec<Chromosome> {
    let s = ctx.scenario();
    let (n, m) = (s.tasks.len(), s.uavs.len());
    let sensors = |t: usize, u: usize| -> Vec<SensorKind> {
        if any_sensor {
            effective_sensors(&s.uavs[u].sensors)
        } else {
            ctx.valid_sensors(t, u).to_vec()
        }
    };
    let per_task: Vec<Vec<TaskOption>> = (0..n).map(|t| task_options(s, t, &sensors)).collect();
    let mut task_combos: Vec<Vec<&TaskOption>> = vec![vec![]];
    for opts in &per_task {
        let mut next = Vec::new();
        for combo in &task_combos {
            for o in opts {
                let mut c = combo.clone();
                c.push(o);
                next.push(c);
            }
        }
        task_combos = next;
    }
    let mut uav_combos: Vec<(Vec<Option<usize>>, Vec<usize>)> = vec![(vec![], vec![])];
    for u in 0..m {
        let mut next = Vec::new();
        for (g, r) in &uav_combos {
            for gcs in std::iter::once(None).chain((0..s.gcss.len()).map(Some)) {
                for p in profile_choices(&s.uavs[u]) {
                    let mut g = g.clone();
                    let mut r = r.clone();
                    g.push(gcs);
                    r.push(p);
                    next.push((g, r));
                }
            }
        }
        uav_combos = next;
    }
    let perms = permutations(n);
    let mut out = Vec::with_capacity(task_combos.len() * perms.len() * uav_combos.len());
    for combo in &task_combos {
        for order in &perms {
            for (gcs, ret) in &uav_combos {
                out.push(Chromosome {
                    assign: combo.iter().map(|o| o.0.clone()).collect(),
                    order: order.clone(),
                    gcs: gcs.clone(),
                    path_profile: combo.iter().map(|o| o.1.clone()).collect(),
                    sensor: combo.iter().map(|o| o.2.clone()).collect(),
                    return_profile: ret.clone(),
                });
            }
        }
    }
    out
}

/// Non-dominated selected projections over every feasible chromosome.
pub fn brute_force_front(ctx: &PlanningContext, sel: &ObjectiveSelection) -> Vec<Vec<f64>> {
    let pts: Vec<Vec<f64>> = enumerate_chromosomes(ctx, false)
        .iter()
        .map(|c| objectives_of(ctx.scenario(), &evaluate(ctx, c)))
        .filter(|v| v.feasible)
        .map(|v| sel.project(&v))
        .collect();
    non_dominated(&pts)
}

pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// O(n²) non-dominated filter with duplicates removed.
pub fn non_dominated(pts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        let dominated = pts.iter().any(|q| dominates(q, p));
        let dup = pts[..i].iter().any(|q| q == p);
        if !dominated && !dup {
            out.push(p.clone());
        }
    }
    out
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Same point sets up to a relative tolerance.
pub fn same_front(a: &[Vec<f64>], b: &[Vec<f64>], rel: f64) -> bool {
    let covered = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        x.iter().all(|p| {
            y.iter()
                .any(|q| p.iter().zip(q).all(|(u, v)| close(*u, *v, rel)))
        })
    };
    a.len() == b.len() && covered(a, b) && covered(b, a)
}

// ---------------------------------------------------------------------------
// Independent checker
// ---------------------------------------------------------------------------

const R_NM: f64 = 3440.065;
const FT_PER_NM: f64 = 6076.115;
const TOL: f64 = 1e-9;

fn hav(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    let ground = 2.0 * R_NM * h.sqrt().min(1.0).asin();
    let dz = (b.alt - a.alt) / FT_PER_NM;
    (ground * ground + dz * dz).sqrt()
}

fn le(a: f64, b: f64) -> bool {
    a <= b || close(a, b, TOL)
}

fn eq(a: f64, b: f64) -> bool {
    close(a, b, TOL)
}

fn allen(rel: AllenRelation, i: (f64, f64), j: (f64, f64)) -> bool {
    use AllenRelation::*;
    let ((a, b), (c, d)) = (i, j);
    match rel {
        Before => le(b, c),
        After => le(d, a),
        Meets => eq(b, c),
        MetBy => eq(d, a),
        Overlaps => le(a, c) && le(c, b) && le(b, d),
        OverlappedBy => le(c, a) && le(a, d) && le(d, b),
        Starts => eq(a, c) && le(b, d),
        StartedBy => eq(a, c) && le(d, b),
        During => le(c, a) && le(b, d),
        Contains => le(a, c) && le(d, b),
        Finishes => le(c, a) && eq(b, d),
        FinishedBy => le(a, c) && eq(b, d),
        Equals => eq(a, c) && eq(b, d),
    }
}

/// Whether a UAV carrying `carried` can use sensor `s` for a task of `kind`.
fn sensor_ok(kind: TaskKind, carried: &[SensorKind], s: SensorKind) -> bool {
    use SensorKind::*;
    let needed: &[SensorKind] = match kind {
        TaskKind::Mon => &[EoirVideo, Isar],
        TaskKind::Es => &[EoirThermal, Sar],
        TaskKind::Tp => &[EoirPlain],
        TaskKind::Map => &[Sar, Isar, Mpr],
    };
    if !needed.contains(&s) {
        return false;
    }
    match s {
        EoirPlain => carried
            .iter()
            .any(|c| matches!(c, EoirPlain | EoirVideo | EoirThermal)),
        EoirVideo | EoirThermal => carried.contains(&s) || carried.contains(&EoirPlain),
        other => carried.contains(&other),
    }
}

fn centre(pts: &[GeoPoint]) -> GeoPoint {
    let k = pts.len() as f64;
    GeoPoint::new(
        pts.iter().map(|p| p.lon).sum::<f64>() / k,
        pts.iter().map(|p| p.lat).sum::<f64>() / k,
        pts.iter().map(|p| p.alt).sum::<f64>() / k,
    )
}

/// Entry, exit, route length and sweep length of a task zone.
fn zone_geometry(s: &MissionScenario, t: usize) -> (GeoPoint, GeoPoint, f64, f64) {
    let task = &s.tasks[t];
    match &task.zone {
        Zone::Point { at } => (*at, *at, 0.0, 0.0),
        Zone::Polyline { points } => {
            let len = points.windows(2).map(|w| hav(&w[0], &w[1])).sum();
            (points[0], points[points.len() - 1], len, 0.0)
        }
        Zone::Polygon { vertices } => {
            let c = centre(vertices);
            let sweep = if task.kind == TaskKind::Map {
                let nm_deg = R_NM * std::f64::consts::PI / 180.0;
                let kx = nm_deg * c.lat.to_radians().cos();
                let mut twice = 0.0;
                for i in 0..vertices.len() {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % vertices.len()];
                    twice += (a.lon - c.lon) * kx * (b.lat - c.lat) * nm_deg
                        - (b.lon - c.lon) * kx * (a.lat - c.lat) * nm_deg;
                }
                twice.abs() / 2.0 / s.map_swath_nm
            } else {
                0.0
            };
            (c, c, 0.0, sweep)
        }
    }
}

/// Feasibility of a chromosome recomputed from the constraint definitions.
pub fn independent_feasible(s: &MissionScenario, c: &Chromosome) -> bool {
    let (n, m) = (s.tasks.len(), s.uavs.len());
    let geo: Vec<_> = (0..n).map(|t| zone_geometry(s, t)).collect();
    let mut intervals: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n];
    let mut load = vec![0usize; s.gcss.len()];

    for u in 0..m {
        let uav = &s.uavs[u];
        let legs: Vec<(usize, usize)> = c
            .order
            .iter()
            .filter_map(|&t| {
                c.assign[t]
                    .iter()
                    .position(|&x| x == u)
                    .map(|slot| (t, slot))
            })
            .collect();
        if legs.is_empty() {
            continue;
        }
        let Some(g) = c.gcs[u] else {
            return false;
        };
        let gcs = &s.gcss[g];
        load[g] += 1;
        if !gcs.permitted_types.contains(&uav.uav_type) {
            return false;
        }
        let mut visited: Vec<GeoPoint> = vec![uav.position];

        let min_ratio = uav
            .profiles
            .iter()
            .map(|p| p.fuel_ratio)
            .fold(f64::INFINITY, f64::min);
        let (mut time, mut dist, mut fuel) = (0.0, 0.0, 0.0);
        let mut pos = uav.position;
        let mut prev_end: Option<f64> = None;
        for &(t, slot) in &legs {
            let task = &s.tasks[t];
            let sensor = c.sensor[t][slot];
            if !sensor_ok(task.kind, &uav.sensors, sensor) {
                return false;
            }
            let prof = &uav.profiles[c.path_profile[t][slot]];
            let (entry, exit, route, sweep) = geo[t];
            let d_path = hav(&pos, &entry);
            let dur_path = d_path / prof.speed;
            let v = uav
                .sensor_performance
                .iter()
                .find(|p| p.sensor == sensor)
                .map_or(uav.max_speed / 2.0, |p| p.speed);
            let k = c.assign[t].len() as f64;
            let required = match task.kind {
                TaskKind::Es => route / v,
                TaskKind::Map => sweep / (k * v),
                _ => 0.0,
            };
            let (departure, start, end, loiter) = match task.window {
                TimeWindow::Fixed { start, end } => {
                    if !le(required, end - start) {
                        return false;
                    }
                    let dep = start - dur_path;
                    let loiter = prev_end.map_or(0.0, |p| dep - p);
                    (dep, start, end, loiter.max(0.0))
                }
                TimeWindow::DurationOnly { duration } => {
                    if !le(required, duration) {
                        return false;
                    }
                    let dep = prev_end.unwrap_or(0.0);
                    (dep, dep + dur_path, dep + dur_path + duration, 0.0)
                }
                TimeWindow::Free {} => {
                    let dep = prev_end.unwrap_or(0.0);
                    (dep, dep + dur_path, dep + dur_path + required, 0.0)
                }
            };
            if departure < -TOL {
                return false;
            }
            if let Some(p) = prev_end {
                if !le(p, departure) {
                    return false;
                }
            }
            let dur = end - start;
            let d_task = match task.kind {
                TaskKind::Mon => v * dur,
                TaskKind::Es => route,
                TaskKind::Tp => 0.0,
                TaskKind::Map => sweep / k,
            };
            time += dur_path + dur + loiter;
            dist += d_path + d_task;
            fuel += (dur_path + dur) * prof.fuel_ratio + loiter * min_ratio;
            intervals[t].push((start, end));
            visited.push(entry);
            visited.extend(task.zone.vertices().iter().copied());
            visited.push(exit);
            prev_end = Some(end);
            pos = exit;
        }
        let ret = &uav.profiles[c.return_profile[u]];
        let d_ret = hav(&pos, &uav.position);
        time += d_ret / ret.speed;
        dist += d_ret;
        fuel += d_ret / ret.speed * ret.fuel_ratio;
        if visited.iter().any(|p| hav(p, &gcs.position) > gcs.coverage) {
            return false;
        }
        if time >= uav.autonomy || dist >= uav.range || fuel >= uav.initial_fuel {
            return false;
        }
    }
    if load.iter().zip(&s.gcss).any(|(l, g)| *l >= g.max_uavs) {
        return false;
    }
    let idx = |id: &str| s.tasks.iter().position(|t| t.id == id).expect("known task");
    for d in &s.dependencies {
        let ok = match d {
            Dependency::Time {
                first,
                second,
                relation,
            } => {
                let (a, b) = (&intervals[idx(first)], &intervals[idx(second)]);
                a.iter().all(|x| b.iter().all(|y| allen(*relation, *x, *y)))
            }
            Dependency::SameUav { first, second } => {
                let mut a = c.assign[idx(first)].clone();
                let mut b = c.assign[idx(second)].clone();
                a.sort();
                b.sort();
                a == b
            }
            Dependency::DiffUav { first, second } => {
                let b = &c.assign[idx(second)];
                !c.assign[idx(first)].iter().any(|u| b.contains(u))
            }
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Degrees of longitude per nautical mile on the equator.
pub fn deg_per_nm() -> f64 {
    1.0 / (3440.065 * std::f64::consts::PI / 180.0)
}

/// Photo tasks get a point, monitoring tasks a small square at `(lon, lat)`.
pub fn point_task(id: &str, kind: TaskKind, lon: f64, lat: f64, window: TimeWindow) -> TaskSpec {
    let zone = match kind {
        TaskKind::Mon => Zone::Polygon {
            vertices: [(0.0, 0.0), (0.05, 0.0), (0.05, 0.05), (0.0, 0.05)]
                .iter()
                .map(|(dx, dy)| GeoPoint::surface(lon + dx, lat + dy))
                .collect(),
        },
        _ => Zone::Point {
            at: GeoPoint::surface(lon, lat),
        },
    };
    TaskSpec {
        id: id.into(),
        kind,
        zone,
        window,
        multi_uav: false,
        required_uavs: None,
    }
}

/// One route profile at 250 kt burning 50 kg/h.
pub fn steady_uav(id: &str, at: GeoPoint) -> UavSpec {
    let mut u = catalog_uav(UavType::Male, id, at, None);
    u.profiles = vec![FlightProfile {
        id: "cruise".into(),
        kind: ProfileKind::Route,
        speed: 250.0,
        fuel_ratio: 50.0,
        altitude: Some(0.0),
        angle: None,
    }];
    u
}

pub fn gcs(at: GeoPoint, max_uavs: usize, types: &[UavType]) -> GcsSpec {
    GcsSpec {
        id: "gcs".into(),
        position: at,
        max_uavs,
        permitted_types: types.to_vec(),
        coverage: 5000.0,
    }
}

/// A UAV on the equator with a fixed photo task 500 NM east, 10 h to 11.5 h.
pub fn long_leg() -> MissionScenario {
    let home = GeoPoint::surface(0.0, 0.0);
    MissionScenario {
        name: "long-leg".into(),
        region: Region {
            min_lon: -1.0,
            min_lat: -1.0,
            max_lon: 10.0,
            max_lat: 1.0,
        },
        tasks: vec![point_task(
            "tp",
            TaskKind::Tp,
            500.0 * deg_per_nm(),
            0.0,
            TimeWindow::Fixed {
                start: 10.0,
                end: 11.5,
            },
        )],
        uavs: vec![steady_uav("male", home)],
        gcss: vec![gcs(home, 2, &UavType::ALL)],
        nfzs: vec![],
        dependencies: vec![],
        map_swath_nm: 1.0,
    }
}

pub fn generate(r: DatasetRecipe) -> MissionScenario {
    generate_dataset(&r).unwrap_or_else(|e| panic!("`{}`: {e}", r.name))
}
