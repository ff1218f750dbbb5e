//! Hypervolume of minimization fronts and the gap between two fronts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::objectives::dominates_slice;

/// Points per Monte Carlo estimate for five or more objectives.
pub const MC_SAMPLES: usize = 1_000_000;
const COVER_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("front is empty")]
    EmptyFront,
    #[error("front points disagree in dimension")]
    Dimension,
    #[error("front contains a non-finite value")]
    NonFinite,
}

/// Optimal and approximate fronts with the hypervolume gap between them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontComparison {
    pub optimal: Vec<Vec<f64>>,
    pub approx: Vec<Vec<f64>>,
    /// Normalized volume dominated by the optimal front but not by the approximation.
    pub hypervolume: f64,
    pub normalized: bool,
    /// Standard error when the volume was estimated by sampling.
    pub std_error: Option<f64>,
}

/// Non-dominated subset, duplicates removed, in lexicographic order.
pub fn non_dominated(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if out.iter().any(|q| dominates_slice(q, p) || q == p) {
            continue;
        }
        out.retain(|q| !dominates_slice(p, q));
        out.push(p.clone());
    }
    out.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

/// Exact hypervolume (up to four objectives) of the region dominated by
/// `points` and bounded by `reference`. Points not strictly better than the
/// reference in every component contribute nothing.
pub fn hypervolume_exact(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let inside: Vec<Vec<f64>> = points
        .iter()
        .filter(|p| p.iter().zip(reference).all(|(x, r)| x < r))
        .cloned()
        .collect();
    hv_rec(&non_dominated(&inside), reference)
}

fn hv_rec(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let d = reference.len();
    if points.is_empty() {
        return 0.0;
    }
    match d {
        1 => reference[0] - points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
        2 => {
            let mut pts: Vec<&Vec<f64>> = points.iter().collect();
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            let mut area = 0.0;
            let mut ceiling = reference[1];
            for p in pts {
                if p[1] < ceiling {
                    area += (reference[0] - p[0]) * (ceiling - p[1]);
                    ceiling = p[1];
                }
            }
            area
        }
        _ => {
            // Slice along the last objective.
            let mut pts: Vec<&Vec<f64>> = points.iter().collect();
            pts.sort_by(|a, b| a[d - 1].total_cmp(&b[d - 1]));
            let mut vol = 0.0;
            let mut active: Vec<Vec<f64>> = Vec::new();
            for (i, p) in pts.iter().enumerate() {
                active.push(p[..d - 1].to_vec());
                let top = pts.get(i + 1).map_or(reference[d - 1], |q| q[d - 1]);
                let depth = top - p[d - 1];
                if depth > 0.0 {
                    vol += depth * hv_rec(&non_dominated(&active), &reference[..d - 1]);
                }
            }
            vol
        }
    }
}

/// Monte Carlo hypervolume estimate with its standard error.
pub fn hypervolume_mc(
    points: &[Vec<f64>],
    reference: &[f64],
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    if points.is_empty() {
        return (0.0, 0.0);
    }
    let d = reference.len();
    let lo: Vec<f64> = (0..d)
        .map(|k| {
            points
                .iter()
                .map(|p| p[k])
                .fold(f64::INFINITY, f64::min)
                .min(reference[k])
        })
        .collect();
    let box_vol: f64 = (0..d).map(|k| reference[k] - lo[k]).product();
    if box_vol <= 0.0 {
        return (0.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; d];
    let mut hits = 0usize;
    for _ in 0..samples {
        for k in 0..d {
            x[k] = rng.random_range(lo[k]..reference[k]);
        }
        if points.iter().any(|p| p.iter().zip(&x).all(|(a, b)| a <= b)) {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    let se = (frac * (1.0 - frac) / samples as f64).sqrt() * box_vol;
    (frac * box_vol, se)
}

fn volume(points: &[Vec<f64>], reference: &[f64]) -> (f64, f64) {
    if reference.len() <= 4 {
        (hypervolume_exact(points, reference), 0.0)
    } else {
        let inside: Vec<Vec<f64>> = points
            .iter()
            .filter(|p| p.iter().zip(reference).all(|(x, r)| x < r))
            .cloned()
            .collect();
        hypervolume_mc(&non_dominated(&inside), reference, MC_SAMPLES, 0x5eed)
    }
}

fn check(front: &[Vec<f64>], dims: usize) -> Result<(), MetricError> {
    if front.is_empty() {
        return Err(MetricError::EmptyFront);
    }
    for p in front {
        if p.len() != dims {
            return Err(MetricError::Dimension);
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(MetricError::NonFinite);
        }
    }
    Ok(())
}

fn covered(p: &[f64], by: &[Vec<f64>]) -> bool {
    by.iter().any(|q| {
        q.iter()
            .zip(p)
            .all(|(a, b)| *a <= *b + COVER_EPS * b.abs().max(1.0))
    })
}

/// Normalized hypervolume gap between an optimal front and an approximation.
///
/// Both fronts are min-max normalized with the bounds of the optimal front
/// (a zero range maps to unit range) and the reference point is 1.1 in every
/// component. The gap is exactly 0 when every optimal point is weakly
/// dominated by some approximate point; otherwise it is
/// `HV(optimal ∪ approx) − HV(approx)`.
pub fn hypervolume_gap(
    optimal: &[Vec<f64>],
    approx: &[Vec<f64>],
) -> Result<FrontComparison, MetricError> {
    let dims = optimal.first().map_or(0, Vec::len);
    check(optimal, dims)?;
    check(approx, dims)?;
    let lo: Vec<f64> = (0..dims)
        .map(|k| optimal.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..dims)
        .map(|k| {
            optimal
                .iter()
                .map(|p| p[k])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let norm = |p: &Vec<f64>| -> Vec<f64> {
        (0..dims)
            .map(|k| {
                let range = hi[k] - lo[k];
                (p[k] - lo[k]) / if range > 0.0 { range } else { 1.0 }
            })
            .collect()
    };
    let opt_n: Vec<Vec<f64>> = optimal.iter().map(norm).collect();
    let app_n: Vec<Vec<f64>> = approx.iter().map(norm).collect();

    let (gap, se) = if optimal.iter().all(|p| covered(p, approx)) {
        (0.0, None)
    } else {
        let reference = vec![1.1; dims];
        let mut union = opt_n.clone();
        union.extend(app_n.iter().cloned());
        let (hv_union, se_u) = volume(&non_dominated(&union), &reference);
        let (hv_app, se_a) = volume(&non_dominated(&app_n), &reference);
        let se = (dims > 4).then(|| (se_u * se_u + se_a * se_a).sqrt());
        ((hv_union - hv_app).max(0.0), se)
    };
    Ok(FrontComparison {
        optimal: non_dominated(optimal),
        approx: non_dominated(approx),
        hypervolume: gap,
        normalized: true,
        std_error: se,
    })
}
