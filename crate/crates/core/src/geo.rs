//! Distances and no-fly-zone avoiding path planning.
//!
//! Distances use a spherical Earth (great circle) combined with the altitude
//! difference. Paths are planned with Theta* over a regular lon/lat grid;
//! line of sight is tested exactly against the no-fly polygons, while the
//! grid only decides which cell centres are usable as waypoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{GeoPoint, NoFlyZone, Region};

/// Mean Earth radius in nautical miles.
pub const EARTH_RADIUS_NM: f64 = 3440.065;
pub const FEET_PER_NM: f64 = 6076.115;
pub const DEFAULT_GRID_CELLS: usize = 64;

/// Great-circle distance combined with the altitude difference, in NM.
pub fn distance(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let surface = great_circle(a, b);
    let dz = (a.alt - b.alt) / FEET_PER_NM;
    surface.hypot(dz)
}

fn great_circle(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_NM * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<GeoPoint>,
    /// Nautical miles.
    pub length: f64,
}

impl Path {
    pub fn new(waypoints: Vec<GeoPoint>) -> Self {
        let length = path_length(&waypoints);
        Self { waypoints, length }
    }
}

/// Sum of the leg distances along a waypoint list.
pub fn path_length(waypoints: &[GeoPoint]) -> f64 {
    waypoints.windows(2).map(|w| distance(&w[0], &w[1])).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("start point lies inside a no-fly zone")]
    BlockedStart,
    #[error("target lies inside a no-fly zone")]
    BlockedGoal,
    #[error("target unreachable around the no-fly zones")]
    Unreachable,
}

// ---------------------------------------------------------------------------
// Planar geometry on (lon, lat).

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn xy(p: &GeoPoint) -> (f64, f64) {
    (p.lon, p.lat)
}

fn on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Closed segment intersection (touching counts).
pub fn segments_intersect(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

/// Even-odd point-in-polygon test; boundary points may go either way.
pub fn point_in_polygon(p: (f64, f64), poly: &[GeoPoint]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = xy(&poly[i]);
        let (xj, yj) = xy(&poly[j]);
        if (yi > p.1) != (yj > p.1) && p.0 < (xj - xi) * (p.1 - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn polygon_edges(poly: &[GeoPoint]) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
    (0..poly.len()).map(move |i| (xy(&poly[i]), xy(&poly[(i + 1) % poly.len()])))
}

/// True when the closed segment touches the polygon (boundary or interior).
pub fn segment_hits_polygon(a: (f64, f64), b: (f64, f64), poly: &[GeoPoint]) -> bool {
    if point_in_polygon(a, poly) || point_in_polygon(b, poly) {
        return true;
    }
    polygon_edges(poly).any(|(c, d)| segments_intersect(a, b, c, d))
}

/// No two non-adjacent edges intersect and adjacent edges only share their vertex.
pub fn polygon_is_simple(poly: &[GeoPoint]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let edges: Vec<_> = polygon_edges(poly).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Collinear overlap of neighbours would also be degenerate.
                let (a, b) = edges[i];
                let (_, d) = edges[j];
                let shared_far = if j == i + 1 { d } else { edges[j].0 };
                let far_of_i = if j == i + 1 { a } else { b };
                if cross(a, b, shared_far) == 0.0
                    && on_segment(shared_far, a, b)
                    && shared_far != far_of_i
                {
                    return false;
                }
                continue;
            }
            let (a, b) = edges[i];
            let (c, d) = edges[j];
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

fn rect_hits_polygon(x0: f64, y0: f64, x1: f64, y1: f64, poly: &[GeoPoint]) -> bool {
    let corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
    if corners.iter().any(|c| point_in_polygon(*c, poly)) {
        return true;
    }
    if poly
        .iter()
        .any(|p| p.lon >= x0 && p.lon <= x1 && p.lat >= y0 && p.lat <= y1)
    {
        return true;
    }
    (0..4).any(|i| {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        polygon_edges(poly).any(|(c, d)| segments_intersect(a, b, c, d))
    })
}

// ---------------------------------------------------------------------------
// Grid.

/// Regular lon/lat grid over the scenario region with a blocked-cell mask.
#[derive(Debug, Clone)]
pub struct Grid {
    region: Region,
    nx: usize,
    ny: usize,
    cell_lon: f64,
    cell_lat: f64,
    blocked: Vec<bool>,
    zones: Vec<Vec<GeoPoint>>,
}

impl Grid {
    /// `cells` x `cells` grid; a cell is blocked when its rectangle touches a zone.
    pub fn new(region: Region, nfzs: &[NoFlyZone], cells: usize) -> Self {
        let cells = cells.max(1);
        let (nx, ny) = (cells, cells);
        let cell_lon = region.width() / nx as f64;
        let cell_lat = region.height() / ny as f64;
        let zones: Vec<Vec<GeoPoint>> = nfzs.iter().map(|z| z.polygon.clone()).collect();
        let mut blocked = vec![false; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let x0 = region.min_lon + ix as f64 * cell_lon;
                let y0 = region.min_lat + iy as f64 * cell_lat;
                blocked[iy * nx + ix] = zones
                    .iter()
                    .any(|z| rect_hits_polygon(x0, y0, x0 + cell_lon, y0 + cell_lat, z));
            }
        }
        Self {
            region,
            nx,
            ny,
            cell_lon,
            cell_lat,
            blocked,
            zones,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (self.cell_lon, self.cell_lat)
    }

    pub fn is_blocked(&self, ix: usize, iy: usize) -> bool {
        self.blocked[iy * self.nx + ix]
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    pub fn has_zones(&self) -> bool {
        !self.zones.is_empty()
    }

    pub fn cell_of(&self, p: &GeoPoint) -> (usize, usize) {
        let fx = ((p.lon - self.region.min_lon) / self.cell_lon).floor();
        let fy = ((p.lat - self.region.min_lat) / self.cell_lat).floor();
        let ix = fx.clamp(0.0, (self.nx - 1) as f64) as usize;
        let iy = fy.clamp(0.0, (self.ny - 1) as f64) as usize;
        (ix, iy)
    }

    pub fn center(&self, ix: usize, iy: usize) -> GeoPoint {
        GeoPoint::surface(
            self.region.min_lon + (ix as f64 + 0.5) * self.cell_lon,
            self.region.min_lat + (iy as f64 + 0.5) * self.cell_lat,
        )
    }

    pub fn inside_zone(&self, p: &GeoPoint) -> bool {
        self.zones.iter().any(|z| point_in_polygon(xy(p), z))
    }

    /// Segment avoids every no-fly polygon.
    pub fn line_of_sight(&self, a: &GeoPoint, b: &GeoPoint) -> bool {
        let (pa, pb) = (xy(a), xy(b));
        let (lo_x, hi_x) = (pa.0.min(pb.0), pa.0.max(pb.0));
        let (lo_y, hi_y) = (pa.1.min(pb.1), pa.1.max(pb.1));
        !self.zones.iter().any(|z| {
            let outside_bbox = z.iter().all(|p| p.lon < lo_x)
                || z.iter().all(|p| p.lon > hi_x)
                || z.iter().all(|p| p.lat < lo_y)
                || z.iter().all(|p| p.lat > hi_y);
            !outside_bbox && segment_hits_polygon(pa, pb, z)
        })
    }

    fn neighbours(&self, ix: usize, iy: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        (-1isize..=1)
            .flat_map(move |dy| (-1isize..=1).map(move |dx| (dx, dy)))
            .filter_map(move |(dx, dy)| {
                let (x, y) = (ix as isize + dx, iy as isize + dy);
                (x >= 0 && y >= 0 && x < nx && y < ny).then_some((x as usize, y as usize))
            })
    }
}

// ---------------------------------------------------------------------------
// Search.

#[derive(Clone, Copy, PartialEq)]
struct OpenEntry {
    f: f64,
    g: f64,
    node: usize,
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap: smallest f first, then larger g, then lower index.
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    ThetaStar,
    AStar,
}

struct Search<'g> {
    grid: &'g Grid,
    from: GeoPoint,
    to: GeoPoint,
    start: usize,
    goal: usize,
    goal_cell: (usize, usize),
}

impl<'g> Search<'g> {
    fn point(&self, node: usize) -> GeoPoint {
        if node == self.start {
            self.from
        } else if node == self.goal {
            self.to
        } else {
            self.grid.center(node % self.grid.nx, node / self.grid.nx)
        }
    }

    fn cell(&self, node: usize) -> (usize, usize) {
        if node == self.start {
            self.grid.cell_of(&self.from)
        } else if node == self.goal {
            self.goal_cell
        } else {
            (node % self.grid.nx, node / self.grid.nx)
        }
    }

    fn successors(&self, node: usize, out: &mut Vec<usize>) {
        out.clear();
        let (ix, iy) = self.cell(node);
        for (x, y) in self.grid.neighbours(ix, iy) {
            if !self.grid.is_blocked(x, y) {
                let id = y * self.grid.nx + x;
                if id != node {
                    out.push(id);
                }
            }
        }
        let (gx, gy) = self.goal_cell;
        if ix.abs_diff(gx) <= 1 && iy.abs_diff(gy) <= 1 {
            out.push(self.goal);
        }
    }

    fn run(&self, mode: Mode) -> Option<Vec<GeoPoint>> {
        let total = self.grid.nx * self.grid.ny + 2;
        let mut g = vec![f64::INFINITY; total];
        let mut parent = vec![usize::MAX; total];
        let mut closed = vec![false; total];
        let mut open = BinaryHeap::new();
        let h = |p: &GeoPoint| distance(p, &self.to);
        g[self.start] = 0.0;
        parent[self.start] = self.start;
        open.push(OpenEntry {
            f: h(&self.from),
            g: 0.0,
            node: self.start,
        });
        let mut succ = Vec::with_capacity(10);
        while let Some(OpenEntry { node, .. }) = open.pop() {
            if closed[node] {
                continue;
            }
            if node == self.goal {
                let mut rev = vec![self.to];
                let mut cur = node;
                while parent[cur] != cur {
                    cur = parent[cur];
                    rev.push(self.point(cur));
                }
                rev.reverse();
                return Some(rev);
            }
            closed[node] = true;
            let here = self.point(node);
            self.successors(node, &mut succ);
            for &next in &succ {
                if closed[next] {
                    continue;
                }
                let there = self.point(next);
                let mut best: Option<(f64, usize)> = None;
                if mode == Mode::ThetaStar {
                    let pp = parent[node];
                    let pp_point = self.point(pp);
                    if self.grid.line_of_sight(&pp_point, &there) {
                        best = Some((g[pp] + distance(&pp_point, &there), pp));
                    }
                }
                if best.is_none() && self.grid.line_of_sight(&here, &there) {
                    best = Some((g[node] + distance(&here, &there), node));
                }
                if let Some((cost, via)) = best {
                    if cost < g[next] {
                        g[next] = cost;
                        parent[next] = via;
                        open.push(OpenEntry {
                            f: cost + h(&there),
                            g: cost,
                            node: next,
                        });
                    }
                }
            }
        }
        None
    }
}

fn finish(grid: &Grid, from: &GeoPoint, to: &GeoPoint, mut pts: Vec<GeoPoint>) -> Path {
    shortcut(grid, &mut pts);
    // Interpolate altitude along the planar progress of the path.
    let planar: Vec<f64> = pts.windows(2).map(|w| great_circle(&w[0], &w[1])).collect();
    let total: f64 = planar.iter().sum();
    let mut acc = 0.0;
    let last = pts.len() - 1;
    for i in 1..last {
        acc += planar[i - 1];
        let frac = if total > 0.0 { acc / total } else { 0.0 };
        pts[i].alt = from.alt + (to.alt - from.alt) * frac;
    }
    pts[0] = *from;
    pts[last] = *to;
    Path::new(pts)
}

/// Greedy line-of-sight shortcutting; never lengthens the path.
fn shortcut(grid: &Grid, pts: &mut Vec<GeoPoint>) {
    let mut out = vec![pts[0]];
    let mut i = 0;
    while i < pts.len() - 1 {
        let mut j = pts.len() - 1;
        while j > i + 1 && !grid.line_of_sight(&pts[i], &pts[j]) {
            j -= 1;
        }
        out.push(pts[j]);
        i = j;
    }
    *pts = out;
}

fn plan_with(grid: &Grid, from: &GeoPoint, to: &GeoPoint, mode: Mode) -> Result<Path, PathError> {
    if grid.inside_zone(from) {
        return Err(PathError::BlockedStart);
    }
    if grid.inside_zone(to) {
        return Err(PathError::BlockedGoal);
    }
    if grid.line_of_sight(from, to) {
        return Ok(Path::new(vec![*from, *to]));
    }
    let cells = grid.nx * grid.ny;
    let search = Search {
        grid,
        from: *from,
        to: *to,
        start: cells,
        goal: cells + 1,
        goal_cell: grid.cell_of(to),
    };
    let pts = search.run(mode).ok_or(PathError::Unreachable)?;
    Ok(finish(grid, from, to, pts))
}

/// Any-angle path from `from` to `to` around the grid's no-fly zones.
pub fn plan_path(grid: &Grid, from: &GeoPoint, to: &GeoPoint) -> Result<Path, PathError> {
    plan_with(grid, from, to, Mode::ThetaStar)
}

/// Grid-constrained A* (8-connected cell centres) on the same graph, used
/// as a reference bound for [`plan_path`].
pub fn grid_astar(grid: &Grid, from: &GeoPoint, to: &GeoPoint) -> Result<Path, PathError> {
    if grid.inside_zone(from) {
        return Err(PathError::BlockedStart);
    }
    if grid.inside_zone(to) {
        return Err(PathError::BlockedGoal);
    }
    if grid.line_of_sight(from, to) {
        return Ok(Path::new(vec![*from, *to]));
    }
    let cells = grid.nx * grid.ny;
    let search = Search {
        grid,
        from: *from,
        to: *to,
        start: cells,
        goal: cells + 1,
        goal_cell: grid.cell_of(to),
    };
    let pts = search.run(Mode::AStar).ok_or(PathError::Unreachable)?;
    Ok(Path::new(pts))
}
