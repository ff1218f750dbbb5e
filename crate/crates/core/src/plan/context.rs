use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geo::{
    distance, path_length, plan_path, Grid, Path, DEFAULT_GRID_CELLS, EARTH_RADIUS_NM,
};
use crate::scenario::{
    usable_sensors, validate_scenario, AllenRelation, Dependency, GeoPoint, MissionScenario,
    ScenarioIssue, SensorKind, TaskKind, Zone,
};

#[derive(Debug, Error)]
pub enum ContextError {
    #[error("invalid scenario: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ScenarioIssue>),
}

/// A planned path plus its farthest distance from each GCS.
#[derive(Debug, Clone, Serialize)]
pub struct PathInfo {
    pub path: Path,
    pub reach: Vec<f64>,
}

/// Entry/exit points and internal lengths of a task zone.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TaskGeometry {
    pub entry: GeoPoint,
    pub exit: GeoPoint,
    /// Polyline length of an escort route, NM.
    pub route_length: f64,
    /// Full sweep length of a mapping zone, NM.
    pub sweep_length: f64,
}

/// Dependency with task ids resolved to indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolvedDependency {
    Time(usize, usize, AllenRelation),
    SameUav(usize, usize),
    DiffUav(usize, usize),
}

/// Everything about a scenario that does not depend on the chromosome:
/// planned paths between all mission sites, task geometry, sensor
/// compatibility and GCS reach. Built once, shared read-only.
#[derive(Debug, Clone)]
pub struct PlanningContext {
    scenario: MissionScenario,
    grid: Grid,
    sites: Vec<GeoPoint>,
    paths: Vec<Option<PathInfo>>,
    geometry: Vec<TaskGeometry>,
    compatible: Vec<Vec<usize>>,
    sensors: Vec<Vec<Vec<SensorKind>>>,
    zone_reach: Vec<Vec<f64>>,
    dependencies: Vec<ResolvedDependency>,
}

const NM_PER_DEGREE: f64 = EARTH_RADIUS_NM * std::f64::consts::PI / 180.0;

fn centroid(points: &[GeoPoint]) -> GeoPoint {
    let k = points.len() as f64;
    GeoPoint::new(
        points.iter().map(|p| p.lon).sum::<f64>() / k,
        points.iter().map(|p| p.lat).sum::<f64>() / k,
        points.iter().map(|p| p.alt).sum::<f64>() / k,
    )
}

/// Shoelace area in NM² on a local equirectangular projection.
pub(crate) fn polygon_area_nm2(poly: &[GeoPoint]) -> f64 {
    let c = centroid(poly);
    let kx = NM_PER_DEGREE * c.lat.to_radians().cos();
    let pts: Vec<(f64, f64)> = poly
        .iter()
        .map(|p| ((p.lon - c.lon) * kx, (p.lat - c.lat) * NM_PER_DEGREE))
        .collect();
    let twice: f64 = (0..pts.len())
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    twice.abs() / 2.0
}

fn geometry(zone: &Zone, kind: TaskKind, swath: f64) -> TaskGeometry {
    match zone {
        Zone::Point { at } => TaskGeometry {
            entry: *at,
            exit: *at,
            route_length: 0.0,
            sweep_length: 0.0,
        },
        Zone::Polyline { points } => TaskGeometry {
            entry: points[0],
            exit: *points.last().expect("validated polyline"),
            route_length: path_length(points),
            sweep_length: 0.0,
        },
        Zone::Polygon { vertices } => {
            let c = centroid(vertices);
            TaskGeometry {
                entry: c,
                exit: c,
                route_length: 0.0,
                sweep_length: if kind == TaskKind::Map {
                    polygon_area_nm2(vertices) / swath
                } else {
                    0.0
                },
            }
        }
    }
}

impl PlanningContext {
    pub fn new(scenario: &MissionScenario) -> Result<Self, ContextError> {
        Self::with_grid_cells(scenario, DEFAULT_GRID_CELLS)
    }

    pub fn with_grid_cells(scenario: &MissionScenario, cells: usize) -> Result<Self, ContextError> {
        let issues = validate_scenario(scenario);
        if !issues.is_empty() {
            return Err(ContextError::Invalid(issues));
        }
        let s = scenario.clone();
        let (m, n) = (s.uavs.len(), s.tasks.len());
        let grid = Grid::new(s.region, &s.nfzs, cells);
        let geometry: Vec<TaskGeometry> = s
            .tasks
            .iter()
            .map(|t| geometry(&t.zone, t.kind, s.map_swath_nm))
            .collect();

        let mut sites: Vec<GeoPoint> = s.uavs.iter().map(|u| u.position).collect();
        sites.extend(geometry.iter().map(|g| g.entry));
        sites.extend(geometry.iter().map(|g| g.exit));

        let ns = sites.len();
        let mut pairs = Vec::new();
        for u in 0..m {
            for t in 0..n {
                pairs.push((u, m + t));
                pairs.push((m + n + t, u));
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    pairs.push((m + n + a, m + b));
                }
            }
        }
        let gcs_pos: Vec<GeoPoint> = s.gcss.iter().map(|g| g.position).collect();
        let reach = |pts: &[GeoPoint]| -> Vec<f64> {
            gcs_pos
                .iter()
                .map(|g| pts.iter().map(|p| distance(p, g)).fold(0.0, f64::max))
                .collect()
        };
        let planned: Vec<((usize, usize), Option<PathInfo>)> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let info = plan_path(&grid, &sites[a], &sites[b])
                    .ok()
                    .map(|path| PathInfo {
                        reach: reach(&path.waypoints),
                        path,
                    });
                ((a, b), info)
            })
            .collect();
        let mut paths = vec![None; ns * ns];
        for ((a, b), info) in planned {
            paths[a * ns + b] = info;
        }

        let sensors: Vec<Vec<Vec<SensorKind>>> = s
            .tasks
            .iter()
            .map(|t| {
                s.uavs
                    .iter()
                    .map(|u| usable_sensors(t.kind, &u.sensors))
                    .collect()
            })
            .collect();
        let compatible = sensors
            .iter()
            .map(|row| (0..m).filter(|&u| !row[u].is_empty()).collect())
            .collect();
        let zone_reach = s.tasks.iter().map(|t| reach(t.zone.vertices())).collect();
        let idx = |id: &str| s.task_index(id).expect("validated dependency");
        let dependencies = s
            .dependencies
            .iter()
            .map(|d| match d {
                Dependency::Time {
                    first,
                    second,
                    relation,
                } => ResolvedDependency::Time(idx(first), idx(second), *relation),
                Dependency::SameUav { first, second } => {
                    ResolvedDependency::SameUav(idx(first), idx(second))
                }
                Dependency::DiffUav { first, second } => {
                    ResolvedDependency::DiffUav(idx(first), idx(second))
                }
            })
            .collect();

        Ok(Self {
            scenario: s,
            grid,
            sites,
            paths,
            geometry,
            compatible,
            sensors,
            zone_reach,
            dependencies,
        })
    }

    pub fn scenario(&self) -> &MissionScenario {
        &self.scenario
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_tasks(&self) -> usize {
        self.scenario.tasks.len()
    }

    pub fn n_uavs(&self) -> usize {
        self.scenario.uavs.len()
    }

    pub fn n_gcss(&self) -> usize {
        self.scenario.gcss.len()
    }

    pub fn base_site(&self, uav: usize) -> usize {
        uav
    }

    pub fn entry_site(&self, task: usize) -> usize {
        self.n_uavs() + task
    }

    pub fn exit_site(&self, task: usize) -> usize {
        self.n_uavs() + self.n_tasks() + task
    }

    pub fn site(&self, idx: usize) -> &GeoPoint {
        &self.sites[idx]
    }

    /// Planned path between two sites; `None` when unreachable.
    pub fn path(&self, from: usize, to: usize) -> Option<&PathInfo> {
        self.paths[from * self.sites.len() + to].as_ref()
    }

    /// Straight-line distance between two sites, ignoring no-fly zones.
    pub fn straight(&self, from: usize, to: usize) -> f64 {
        distance(&self.sites[from], &self.sites[to])
    }

    pub fn geometry(&self, task: usize) -> &TaskGeometry {
        &self.geometry[task]
    }

    /// UAVs that carry at least one sensor usable for the task.
    pub fn compatible_uavs(&self, task: usize) -> &[usize] {
        &self.compatible[task]
    }

    pub fn valid_sensors(&self, task: usize, uav: usize) -> &[SensorKind] {
        &self.sensors[task][uav]
    }

    /// Farthest zone vertex of a task from each GCS.
    pub fn zone_reach(&self, task: usize) -> &[f64] {
        &self.zone_reach[task]
    }

    pub fn dependencies(&self) -> &[ResolvedDependency] {
        &self.dependencies
    }
}
