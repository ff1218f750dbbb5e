//! Synthetic scenario generation from structural recipes.
//!
//! A scenario is built around a hidden reference plan: tasks are assigned
//! and ordered at random, simulated with the slowest profile, and fixed
//! windows are cut around the simulated times with random slack. The
//! reference chromosome is re-checked with the evaluator before a scenario
//! is returned, so every generated scenario has at least one feasible plan.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{distance, point_in_polygon, segment_hits_polygon};
use crate::plan::{evaluate, Chromosome, PlanningContext};
use crate::scenario::{
    catalog_uav, AllenRelation, Dependency, GcsSpec, GeoPoint, MissionScenario, NoFlyZone, Region,
    TaskKind, TaskSpec, TimeWindow, UavType, Zone,
};

pub const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TaskMix {
    pub mon: usize,
    pub es: usize,
    pub tp: usize,
    pub map: usize,
}

impl TaskMix {
    pub fn total(&self) -> usize {
        self.mon + self.es + self.tp + self.map
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UavMix {
    pub urav: usize,
    pub male: usize,
    pub hale: usize,
    pub ucav: usize,
}

impl UavMix {
    pub fn total(&self) -> usize {
        self.urav + self.male + self.hale + self.ucav
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecipe {
    pub name: String,
    pub tasks: TaskMix,
    pub uavs: UavMix,
    pub gcs_count: usize,
    pub nfz_count: usize,
    pub fixed_count: usize,
    pub unfixed_count: usize,
    pub dependency_count: usize,
    /// Mapping tasks flown by two UAVs.
    #[serde(default)]
    pub multi_uav_count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),
    #[error("recipe `{name}` produced no feasible scenario in {attempts} attempts")]
    Infeasible { name: String, attempts: usize },
}

const REGION: Region = Region {
    min_lon: -4.0,
    min_lat: 40.0,
    max_lon: -2.0,
    max_lat: 42.0,
};

#[allow(clippy::too_many_arguments)]
fn recipe(
    name: &str,
    tasks: [usize; 4],
    uavs: [usize; 4],
    gcs: usize,
    nfz: usize,
    fixed: usize,
    unfixed: usize,
    deps: usize,
    multi: usize,
    seed: u64,
) -> DatasetRecipe {
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
        gcs_count: gcs,
        nfz_count: nfz,
        fixed_count: fixed,
        unfixed_count: unfixed,
        dependency_count: deps,
        multi_uav_count: multi,
        seed,
    }
}

pub const BUILTIN_RECIPES: [&str; 9] = ["d1", "d2", "d3", "d4a", "d4b", "d4c", "d4d", "d4e", "d5"];

/// Built-in recipes mirroring the structure of the reference datasets.
pub fn builtin_recipe(name: &str) -> Option<DatasetRecipe> {
    // task mix: MON, ES, TP, MAP; fleet: URAV, MALE, HALE, UCAV
    let std6 = [2, 2, 2, 0];
    let fleet4 = [1, 1, 1, 1];
    let fleet5 = [2, 1, 1, 1];
    Some(match name {
        "d1" => recipe(name, std6, fleet4, 1, 0, 6, 0, 0, 0, 11),
        "d2" => recipe(name, std6, fleet4, 1, 1, 6, 0, 0, 0, 12),
        "d3" => recipe(name, [0, 0, 0, 3], [0, 1, 1, 0], 1, 0, 0, 3, 0, 1, 13),
        "d4a" => recipe(name, std6, fleet5, 2, 2, 6, 0, 0, 0, 41),
        "d4b" => recipe(name, std6, fleet5, 2, 2, 3, 3, 0, 0, 42),
        "d4c" => recipe(name, std6, fleet5, 2, 2, 3, 3, 1, 0, 43),
        "d4d" => recipe(name, std6, fleet5, 2, 2, 0, 6, 0, 0, 44),
        "d4e" => recipe(name, std6, fleet5, 2, 2, 0, 6, 3, 0, 45),
        "d5" => recipe(name, [2, 1, 2, 2], [2, 2, 0, 1], 3, 3, 4, 3, 1, 0, 5),
        _ => return None,
    })
}

impl DatasetRecipe {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::InvalidRecipe(m));
        let n = self.tasks.total();
        if n == 0 || self.uavs.total() == 0 || self.gcs_count == 0 {
            return bad("needs at least one task, UAV and GCS".into());
        }
        if n > 60 {
            return bad("at most 60 tasks".into());
        }
        if self.fixed_count + self.unfixed_count != n {
            return bad(format!(
                "fixed + unfixed = {} but {n} tasks",
                self.fixed_count + self.unfixed_count
            ));
        }
        if self.multi_uav_count > self.tasks.map {
            return bad("multi-UAV tasks must be mapping tasks".into());
        }
        if self.gcs_count > 3 || self.nfz_count > 3 {
            return bad("at most 3 GCSs and 3 no-fly zones".into());
        }
        Ok(())
    }
}

struct Gen<'r> {
    recipe: &'r DatasetRecipe,
    rng: ChaCha8Rng,
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

impl Gen<'_> {
    fn inner_point(&mut self, margin: f64) -> GeoPoint {
        let r = REGION;
        GeoPoint::surface(
            lerp(
                r.min_lon,
                r.max_lon,
                self.rng.random_range(margin..1.0 - margin),
            ),
            lerp(
                r.min_lat,
                r.max_lat,
                self.rng.random_range(margin..1.0 - margin),
            ),
        )
    }

    fn border_point(&mut self) -> GeoPoint {
        let r = REGION;
        let t = self.rng.random_range(0.05..0.95);
        match self.rng.random_range(0..4) {
            0 => GeoPoint::surface(lerp(r.min_lon, r.max_lon, t), r.min_lat),
            1 => GeoPoint::surface(lerp(r.min_lon, r.max_lon, t), r.max_lat),
            2 => GeoPoint::surface(r.min_lon, lerp(r.min_lat, r.max_lat, t)),
            _ => GeoPoint::surface(r.max_lon, lerp(r.min_lat, r.max_lat, t)),
        }
    }

    /// Convex quadrilateral inscribed in a circle around `c`.
    fn quad(&mut self, c: GeoPoint, radius: f64) -> Vec<GeoPoint> {
        let base = self.rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
        (0..4)
            .map(|k| {
                let a = base
                    + k as f64 * std::f64::consts::FRAC_PI_2
                    + self.rng.random_range(-0.3..0.3);
                GeoPoint::surface(c.lon + radius * a.cos(), c.lat + radius * a.sin())
            })
            .collect()
    }

    fn nfzs(&mut self) -> Vec<NoFlyZone> {
        let k = self.recipe.nfz_count;
        if k == 0 {
            return Vec::new();
        }
        // Each zone covers at most 10% / k of the region (a cyclic quad has area <= 2 r^2).
        let area = REGION.width() * REGION.height();
        let radius = (0.1 * area / k as f64 / 2.0).sqrt() * 0.95;
        let mut zones: Vec<(GeoPoint, f64)> = Vec::new();
        while zones.len() < k {
            let c = if k == 1 {
                GeoPoint::surface(-3.0, 41.0)
            } else {
                self.inner_point(0.25)
            };
            let r = radius * self.rng.random_range(0.8..1.0);
            if zones
                .iter()
                .all(|(o, ro)| ((o.lon - c.lon).hypot(o.lat - c.lat)) > r + ro + 0.1)
            {
                zones.push((c, r));
            }
        }
        zones
            .into_iter()
            .enumerate()
            .map(|(i, (c, r))| NoFlyZone {
                id: format!("nfz-{}", i + 1),
                polygon: self.quad(c, r),
            })
            .collect()
    }

    fn clear_of(zones: &[NoFlyZone], pts: &[GeoPoint]) -> bool {
        zones.iter().all(|z| {
            pts.iter()
                .all(|p| !point_in_polygon((p.lon, p.lat), &z.polygon))
                && pts.windows(2).all(|w| {
                    !segment_hits_polygon((w[0].lon, w[0].lat), (w[1].lon, w[1].lat), &z.polygon)
                })
        })
    }

    fn zone(&mut self, kind: TaskKind, nfzs: &[NoFlyZone]) -> Zone {
        loop {
            let c = self.inner_point(0.1);
            let zone = match kind {
                TaskKind::Tp => Zone::Point { at: c },
                TaskKind::Es => {
                    let mut pts = vec![c];
                    let mut heading = self.rng.random_range(0.0..std::f64::consts::TAU);
                    for _ in 0..2 {
                        heading += self.rng.random_range(-0.6..0.6);
                        let step = self.rng.random_range(0.08..0.16);
                        let last = *pts.last().expect("non-empty");
                        pts.push(GeoPoint::surface(
                            last.lon + step * heading.cos(),
                            last.lat + step * heading.sin(),
                        ));
                    }
                    Zone::Polyline { points: pts }
                }
                TaskKind::Mon => {
                    let r = self.rng.random_range(0.03..0.06);
                    Zone::Polygon {
                        vertices: self.quad(c, r),
                    }
                }
                TaskKind::Map => {
                    let r = self.rng.random_range(0.04..0.07);
                    Zone::Polygon {
                        vertices: self.quad(c, r),
                    }
                }
            };
            let inside = zone.vertices().iter().all(|p| REGION.contains(p));
            let mut probe = zone.vertices().to_vec();
            if matches!(zone, Zone::Polygon { .. }) {
                probe.push(probe[0]);
            }
            if inside && Self::clear_of(nfzs, &probe) {
                return zone;
            }
        }
    }

    fn attempt(&mut self) -> Option<MissionScenario> {
        let r = self.recipe;
        let nfzs = self.nfzs();

        let mut uavs = Vec::new();
        for (ty, count, tag) in [
            (UavType::Hale, r.uavs.hale, "hale"),
            (UavType::Male, r.uavs.male, "male"),
            (UavType::Ucav, r.uavs.ucav, "ucav"),
            (UavType::Urav, r.uavs.urav, "urav"),
        ] {
            for i in 0..count {
                let pos = self.border_point();
                uavs.push(catalog_uav(ty, &format!("{tag}-{}", i + 1), pos, None));
            }
        }

        let mut kinds = Vec::new();
        for (kind, count) in [
            (TaskKind::Mon, r.tasks.mon),
            (TaskKind::Es, r.tasks.es),
            (TaskKind::Tp, r.tasks.tp),
            (TaskKind::Map, r.tasks.map),
        ] {
            kinds.extend(std::iter::repeat_n(kind, count));
        }
        let n = kinds.len();
        let mut fixed = vec![false; n];
        for i in rand::seq::index::sample(&mut self.rng, n, r.fixed_count) {
            fixed[i] = true;
        }
        let mut multi_left = r.multi_uav_count;
        let mut counters = [0usize; 4];
        let mut tasks = Vec::with_capacity(n);
        for &kind in &kinds {
            let tag = match kind {
                TaskKind::Mon => 0,
                TaskKind::Es => 1,
                TaskKind::Tp => 2,
                TaskKind::Map => 3,
            };
            counters[tag] += 1;
            let multi = kind == TaskKind::Map && multi_left > 0;
            if multi {
                multi_left -= 1;
            }
            let id = format!("{}-{}", ["mon", "es", "tp", "map"][tag], counters[tag]);
            let zone = self.zone(kind, &nfzs);
            tasks.push(TaskSpec {
                id,
                kind,
                zone,
                // Placeholder until durations are drawn.
                window: match kind {
                    TaskKind::Mon | TaskKind::Tp => TimeWindow::DurationOnly { duration: 1.0 },
                    TaskKind::Es | TaskKind::Map => TimeWindow::Free {},
                },
                multi_uav: multi,
                required_uavs: None,
            });
        }

        let diag = distance(
            &GeoPoint::surface(REGION.min_lon, REGION.min_lat),
            &GeoPoint::surface(REGION.max_lon, REGION.max_lat),
        );
        let m = uavs.len();
        let gcss = self.gcss(m, diag);

        let mut scenario = MissionScenario {
            name: r.name.clone(),
            region: REGION,
            tasks,
            uavs,
            gcss,
            nfzs,
            dependencies: Vec::new(),
            map_swath_nm: 1.0,
        };

        // Durations: fixed sensing times for MON/TP, geometric time with the
        // slowest compatible UAV (10% margin) for ES/MAP.
        let probe_ctx = PlanningContext::new(&scenario).ok()?;
        let mut durations = vec![0.0; n];
        for (t, task) in scenario.tasks.iter().enumerate() {
            let compatible = probe_ctx.compatible_uavs(t);
            if compatible.len() < task.required_uav_count() {
                return None;
            }
            let uavs = &scenario.uavs;
            let slowest = compatible
                .iter()
                .flat_map(|&u| {
                    probe_ctx
                        .valid_sensors(t, u)
                        .iter()
                        .map(move |s| uavs[u].optimum_speed(*s))
                })
                .fold(f64::INFINITY, f64::min);
            let geo = probe_ctx.geometry(t);
            let k = task.required_uav_count() as f64;
            durations[t] = match task.kind {
                TaskKind::Mon => self.rng.random_range(0.3..1.0),
                TaskKind::Tp => self.rng.random_range(0.05..0.15),
                TaskKind::Es => 1.1 * geo.route_length / slowest,
                TaskKind::Map => 1.1 * geo.sweep_length / (k * slowest),
            };
        }

        // Reference plan.
        let mut chrom = Chromosome {
            assign: Vec::with_capacity(n),
            order: (0..n).collect(),
            gcs: vec![Some(0); m],
            path_profile: Vec::with_capacity(n),
            sensor: Vec::with_capacity(n),
            return_profile: vec![0; m],
        };
        let n_used = self.rng.random_range(1..=m);
        let mut pool: Vec<usize> = (0..m).collect();
        pool.shuffle(&mut self.rng);
        let preferred: Vec<usize> = pool[..n_used].to_vec();
        for t in 0..n {
            let k = scenario.tasks[t].required_uav_count();
            let compatible = probe_ctx.compatible_uavs(t);
            let mut candidates: Vec<usize> = compatible
                .iter()
                .copied()
                .filter(|u| preferred.contains(u))
                .collect();
            if candidates.len() < k {
                candidates = compatible.to_vec();
            }
            let set: Vec<usize> = candidates
                .choose_multiple(&mut self.rng, k)
                .copied()
                .collect();
            chrom.sensor.push(
                set.iter()
                    .map(|&u| {
                        *probe_ctx
                            .valid_sensors(t, u)
                            .choose(&mut self.rng)
                            .expect("compatible")
                    })
                    .collect(),
            );
            chrom.path_profile.push(vec![0; k]);
            chrom.assign.push(set);
        }
        chrom.order.shuffle(&mut self.rng);

        // Simulate with slowest profile and cut windows.
        let mut free_at = vec![0.0f64; m];
        let mut at_site: Vec<usize> = (0..m).map(|u| probe_ctx.base_site(u)).collect();
        let mut intervals: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n];
        for &t in &chrom.order {
            let set = &chrom.assign[t];
            let legs: Vec<f64> = set
                .iter()
                .map(|&u| {
                    probe_ctx
                        .path(at_site[u], probe_ctx.entry_site(t))
                        .map(|p| p.path.length / scenario.uavs[u].profiles[0].speed)
                })
                .collect::<Option<Vec<f64>>>()?;
            if fixed[t] {
                let arrival = set
                    .iter()
                    .zip(&legs)
                    .map(|(&u, d)| free_at[u] + d)
                    .fold(0.0, f64::max);
                let start = arrival + self.rng.random_range(0.05..0.4);
                let end = start + durations[t];
                scenario.tasks[t].window = TimeWindow::Fixed { start, end };
                for &u in set {
                    free_at[u] = end;
                    intervals[t].push((start, end));
                }
            } else {
                scenario.tasks[t].window = match scenario.tasks[t].kind {
                    TaskKind::Mon | TaskKind::Tp => TimeWindow::DurationOnly {
                        duration: durations[t],
                    },
                    TaskKind::Es | TaskKind::Map => TimeWindow::Free {},
                };
                for (&u, d) in set.iter().zip(&legs) {
                    let slot = set.iter().position(|x| *x == u).expect("member");
                    let speed = scenario.uavs[u].optimum_speed(chrom.sensor[t][slot]);
                    let geo = probe_ctx.geometry(t);
                    let dur = match (scenario.tasks[t].window, scenario.tasks[t].kind) {
                        (TimeWindow::DurationOnly { duration }, _) => duration,
                        (_, TaskKind::Es) => geo.route_length / speed,
                        (_, _) => geo.sweep_length / (set.len() as f64 * speed),
                    };
                    let start = free_at[u] + d;
                    free_at[u] = start + dur;
                    intervals[t].push((start, start + dur));
                }
            }
            for &u in set {
                at_site[u] = probe_ctx.exit_site(t);
            }
        }

        scenario.dependencies = self.dependencies(&scenario, &chrom, &intervals);
        let ctx = PlanningContext::new(&scenario).ok()?;
        for gcs in self.gcs_assignments(m, scenario.gcss.len()) {
            chrom.gcs = gcs;
            if evaluate(&ctx, &chrom).report.feasible {
                return Some(scenario);
            }
        }
        None
    }

    fn gcss(&mut self, m: usize, diag: f64) -> Vec<GcsSpec> {
        let all = UavType::ALL.to_vec();
        let mut out = Vec::new();
        let layout: Vec<(usize, Vec<UavType>, f64)> = match self.recipe.gcs_count {
            1 => vec![(m + 1, all, 0.8)],
            2 => vec![
                (4, all, 0.8),
                (3, vec![UavType::Urav, UavType::Male, UavType::Ucav], 0.45),
            ],
            _ => vec![
                (3, all, 0.8),
                (3, vec![UavType::Urav, UavType::Male], 0.8),
                (3, UavType::ALL.to_vec(), 0.4),
            ],
        };
        for (i, (max_uavs, types, cov)) in layout.into_iter().enumerate() {
            // Mid west/east edge: 0.8 of the diagonal reaches every corner from there.
            let position = if i == 0 {
                let r = REGION;
                let lat = lerp(r.min_lat, r.max_lat, self.rng.random_range(0.4..0.6));
                let lon = if self.rng.random_bool(0.5) {
                    r.min_lon
                } else {
                    r.max_lon
                };
                GeoPoint::surface(lon, lat)
            } else {
                self.border_point()
            };
            out.push(GcsSpec {
                id: format!("gcs-{}", i + 1),
                position,
                max_uavs,
                permitted_types: types,
                coverage: cov * diag,
            });
        }
        out
    }

    /// Every assignment of GCS indices to UAVs, lexicographic.
    fn gcs_assignments(&self, m: usize, g: usize) -> Vec<Vec<Option<usize>>> {
        let total = g.pow(m as u32);
        (0..total)
            .map(|mut code| {
                (0..m)
                    .map(|_| {
                        let v = code % g;
                        code /= g;
                        Some(v)
                    })
                    .collect()
            })
            .collect()
    }

    /// Dependencies that the reference plan satisfies.
    fn dependencies(
        &mut self,
        scenario: &MissionScenario,
        chrom: &Chromosome,
        intervals: &[Vec<(f64, f64)>],
    ) -> Vec<Dependency> {
        let n = scenario.tasks.len();
        let id = |t: usize| scenario.tasks[t].id.clone();
        let mut candidates = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let before = intervals[i].iter().all(|a| {
                    intervals[j]
                        .iter()
                        .all(|b| AllenRelation::Before.holds(*a, *b))
                });
                if before {
                    candidates.push(Dependency::Time {
                        first: id(i),
                        second: id(j),
                        relation: AllenRelation::Before,
                    });
                    candidates.push(Dependency::Time {
                        first: id(j),
                        second: id(i),
                        relation: AllenRelation::After,
                    });
                }
                if i < j {
                    let (mut a, mut b) = (chrom.assign[i].clone(), chrom.assign[j].clone());
                    a.sort_unstable();
                    b.sort_unstable();
                    if a == b {
                        candidates.push(Dependency::SameUav {
                            first: id(i),
                            second: id(j),
                        });
                    } else if !a.iter().any(|u| b.contains(u)) {
                        candidates.push(Dependency::DiffUav {
                            first: id(i),
                            second: id(j),
                        });
                    }
                }
            }
        }
        let k = self.recipe.dependency_count.min(candidates.len());
        let mut picked: Vec<Dependency> = Vec::new();
        candidates.shuffle(&mut self.rng);
        for d in candidates {
            if picked.len() == k {
                break;
            }
            let (a, b) = d.tasks();
            let clash = picked.iter().any(|p| {
                let (x, y) = p.tasks();
                (x == a && y == b) || (x == b && y == a)
            });
            if !clash {
                picked.push(d);
            }
        }
        picked
    }
}

/// Builds a feasible scenario from a recipe, deterministically from its seed.
pub fn generate_dataset(recipe: &DatasetRecipe) -> Result<MissionScenario, DatasetError> {
    recipe.validate()?;
    let mut g = Gen {
        recipe,
        rng: ChaCha8Rng::seed_from_u64(recipe.seed),
    };
    for attempt in 0..MAX_ATTEMPTS {
        if let Some(s) = g.attempt() {
            if s.dependencies.len() == recipe.dependency_count {
                log::debug!(
                    "dataset `{}` generated on attempt {}",
                    recipe.name,
                    attempt + 1
                );
                return Ok(s);
            }
        }
    }
    Err(DatasetError::Infeasible {
        name: recipe.name.clone(),
        attempts: MAX_ATTEMPTS,
    })
}
