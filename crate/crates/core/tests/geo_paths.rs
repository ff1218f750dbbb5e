//! Path planning against independent geometric oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uavplan_core::geo::grid_astar;
use uavplan_core::scenario::{GeoPoint, NoFlyZone, Region};
use uavplan_core::{plan_path, Grid, PathError};

const REGION: Region = Region {
    min_lon: -4.0,
    min_lat: 40.0,
    max_lon: -2.0,
    max_lat: 42.0,
};
const CELLS: usize = 64;

fn haversine(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (p1, p2) = (a.1.to_radians(), b.1.to_radians());
    let dp = p2 - p1;
    let dl = (b.0 - a.0).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * 3440.065 * h.sqrt().asin()
}

type Rect = (f64, f64, f64, f64);

fn zone(i: usize, r: Rect) -> NoFlyZone {
    let (x0, y0, x1, y1) = r;
    NoFlyZone {
        id: format!("z{i}"),
        polygon: vec![
            GeoPoint::surface(x0, y0),
            GeoPoint::surface(x1, y0),
            GeoPoint::surface(x1, y1),
            GeoPoint::surface(x0, y1),
        ],
    }
}

fn strictly_inside(p: (f64, f64), r: &Rect) -> bool {
    p.0 > r.0 && p.0 < r.2 && p.1 > r.1 && p.1 < r.3
}

/// Segment enters the open interior of an axis-aligned rectangle
/// (Liang-Barsky clipping with a strictly positive overlap).
fn crosses_interior(a: (f64, f64), b: (f64, f64), r: &Rect) -> bool {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-dx, a.0 - r.0),
        (dx, r.2 - a.0),
        (-dy, a.1 - r.1),
        (dy, r.3 - a.1),
    ] {
        if p == 0.0 {
            if q <= 0.0 {
                return false;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    if t1 - t0 <= 1e-12 {
        return false;
    }
    let mid = (t0 + t1) / 2.0;
    strictly_inside((a.0 + mid * dx, a.1 + mid * dy), r)
}

/// Shortest obstacle-avoiding length over the visibility graph of the
/// endpoints and rectangle corners with its bend count, or `None` when
/// disconnected.
fn visibility_shortest(from: (f64, f64), to: (f64, f64), rects: &[Rect]) -> Option<(f64, usize)> {
    let mut nodes = vec![from, to];
    for r in rects {
        nodes.extend([(r.0, r.1), (r.2, r.1), (r.2, r.3), (r.0, r.3)]);
    }
    let n = nodes.len();
    let visible = |i: usize, j: usize| {
        rects
            .iter()
            .all(|r| !crosses_interior(nodes[i], nodes[j], r))
    };
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut bends = vec![0usize; n];
    dist[0] = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&i| !done[i])
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))?;
        if dist[u].is_infinite() {
            break;
        }
        done[u] = true;
        for v in 0..n {
            let d = dist[u] + haversine(nodes[u], nodes[v]);
            if !done[v] && d < dist[v] && visible(u, v) {
                dist[v] = d;
                bends[v] = bends[u] + usize::from(u != 0);
            }
        }
    }
    dist[1].is_finite().then_some((dist[1], bends[1]))
}

fn waypoint_length(pts: &[GeoPoint]) -> f64 {
    pts.windows(2)
        .map(|w| haversine((w[0].lon, w[0].lat), (w[1].lon, w[1].lat)))
        .sum()
}

/// Disjoint rectangles at least `gap` degrees apart.
fn random_rects(rng: &mut ChaCha8Rng, count: usize, gap: f64) -> Vec<Rect> {
    let mut out: Vec<Rect> = Vec::new();
    while out.len() < count {
        let (w, h) = (rng.random_range(0.1..0.5), rng.random_range(0.1..0.5));
        let x0 = rng.random_range(-3.8..-2.2 - w);
        let y0 = rng.random_range(40.2..41.8 - h);
        let r = (x0, y0, x0 + w, y0 + h);
        if out
            .iter()
            .all(|o| r.0 > o.2 + gap || o.0 > r.2 + gap || r.1 > o.3 + gap || o.1 > r.3 + gap)
        {
            out.push(r);
        }
    }
    out
}

fn free_point(rng: &mut ChaCha8Rng, rects: &[Rect], margin: f64) -> (f64, f64) {
    loop {
        let p = (
            rng.random_range(-3.95..-2.05),
            rng.random_range(40.05..41.95),
        );
        let clear = rects.iter().all(|r| {
            !strictly_inside(p, &(r.0 - margin, r.1 - margin, r.2 + margin, r.3 + margin))
        });
        if clear {
            return p;
        }
    }
}

fn surface(p: (f64, f64)) -> GeoPoint {
    GeoPoint::surface(p.0, p.1)
}

/// Waypoints sit on centres of cells clear of every zone, so each bend of
/// the optimum may cost a detour of up to two cell diagonals.
#[test]
fn theta_star_is_near_the_visibility_graph_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cell = 2.0 / CELLS as f64;
    let diagonal = haversine((-3.0, 40.0), (-3.0 + cell, 40.0 + cell));
    let mut worst: f64 = 0.0;
    for _ in 0..40 {
        let count = rng.random_range(1..=4);
        let rects = random_rects(&mut rng, count, 4.0 * cell);
        let zones: Vec<NoFlyZone> = rects.iter().enumerate().map(|(i, r)| zone(i, *r)).collect();
        let grid = Grid::new(REGION, &zones, CELLS);
        let (a, b) = (
            free_point(&mut rng, &rects, 2.0 * cell),
            free_point(&mut rng, &rects, 2.0 * cell),
        );
        let (optimum, bends) = visibility_shortest(a, b, &rects)
            .expect("separated rectangles leave the plane connected");
        let path = plan_path(&grid, &surface(a), &surface(b)).expect("reachable");
        let len = waypoint_length(&path.waypoints);
        for w in path.waypoints.windows(2) {
            let (p, q) = ((w[0].lon, w[0].lat), (w[1].lon, w[1].lat));
            assert!(
                rects.iter().all(|r| !crosses_interior(p, q, r)),
                "path enters a zone"
            );
        }
        assert!(
            len >= optimum * (1.0 - 1e-4),
            "shorter than the optimum: {len} < {optimum}"
        );
        let excess = len - optimum;
        assert!(
            excess <= 2.0 * diagonal * bends as f64 + 1e-9,
            "excess {excess:.3} NM over {bends} bends"
        );
        worst = worst.max(excess / optimum);
    }
    assert!(worst <= 0.05, "worst relative excess {worst:.4}");
}

#[test]
fn theta_star_never_exceeds_grid_astar() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cell = 2.0 / CELLS as f64;
    for _ in 0..40 {
        let rects = random_rects(&mut rng, 3, 4.0 * cell);
        let zones: Vec<NoFlyZone> = rects.iter().enumerate().map(|(i, r)| zone(i, *r)).collect();
        let grid = Grid::new(REGION, &zones, CELLS);
        let (a, b) = (
            free_point(&mut rng, &rects, 2.0 * cell),
            free_point(&mut rng, &rects, 2.0 * cell),
        );
        let theta = plan_path(&grid, &surface(a), &surface(b)).expect("reachable");
        let astar = grid_astar(&grid, &surface(a), &surface(b)).expect("reachable");
        assert!(theta.length <= astar.length + 1e-9);
        assert!(theta.length >= haversine(a, b) - 1e-9);
    }
}

/// Four bars around a target; `door` opens a gap of that width in the east bar.
fn ring(door: f64) -> Vec<Rect> {
    let (x0, y0, x1, y1, t) = (-3.3, 40.7, -2.7, 41.3, 0.1);
    let mut out = vec![
        (x0, y0, x1, y0 + t),
        (x0, y1 - t, x1, y1),
        (x0, y0, x0 + t, y1),
    ];
    if door > 0.0 {
        let mid = (y0 + y1) / 2.0;
        out.push((x1 - t, y0, x1, mid - door / 2.0));
        out.push((x1 - t, mid + door / 2.0, x1, y1));
    } else {
        out.push((x1 - t, y0, x1, y1));
    }
    out
}

#[test]
fn reachability_matches_the_geometric_oracle() {
    let cell = 2.0 / CELLS as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for door in [0.0, 6.0 * cell, 10.0 * cell] {
        let rects = ring(door);
        let zones: Vec<NoFlyZone> = rects.iter().enumerate().map(|(i, r)| zone(i, *r)).collect();
        let grid = Grid::new(REGION, &zones, CELLS);
        let target = (-3.0, 41.0);
        for _ in 0..10 {
            let start = loop {
                let p = free_point(&mut rng, &rects, 2.0 * cell);
                if !(p.0 > -3.3 && p.0 < -2.7 && p.1 > 40.7 && p.1 < 41.3) {
                    break p;
                }
            };
            let oracle = visibility_shortest(start, target, &rects);
            let ours = plan_path(&grid, &surface(start), &surface(target));
            match oracle {
                None => assert_eq!(ours, Err(PathError::Unreachable)),
                Some((opt, _)) => {
                    let len = ours.expect("oracle finds a route").length;
                    assert!(len >= opt * (1.0 - 1e-4));
                }
            }
        }
    }
}
