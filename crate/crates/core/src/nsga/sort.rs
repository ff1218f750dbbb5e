//! Fast non-dominated sorting and crowding distance.

use std::collections::HashMap;

use crate::objectives::dominates_slice;

/// Front rank (0 = non-dominated) and crowding distance of each input vector.
pub fn rank_and_crowd(points: &[Vec<f64>]) -> Vec<(usize, f64)> {
    let ranks = front_ranks(points);
    let crowding = crowding_distances(points, &ranks);
    ranks.into_iter().zip(crowding).collect()
}

/// Front index of every vector. Identical vectors are sorted once.
pub fn front_ranks(points: &[Vec<f64>]) -> Vec<usize> {
    let mut ids: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut uniques: Vec<&[f64]> = Vec::new();
    let of: Vec<usize> = points
        .iter()
        .map(|p| {
            let key: Vec<u64> = p.iter().map(|x| x.to_bits()).collect();
            *ids.entry(key).or_insert_with(|| {
                uniques.push(p);
                uniques.len() - 1
            })
        })
        .collect();

    let u = uniques.len();
    let mut dominated_by = vec![0usize; u];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); u];
    for i in 0..u {
        for j in (i + 1)..u {
            if dominates_slice(uniques[i], uniques[j]) {
                dominates[i].push(j);
                dominated_by[j] += 1;
            } else if dominates_slice(uniques[j], uniques[i]) {
                dominates[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut rank = vec![0usize; u];
    let mut current: Vec<usize> = (0..u).filter(|&i| dominated_by[i] == 0).collect();
    let mut r = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            rank[i] = r;
            for &j in &dominates[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        current = next;
        r += 1;
    }
    of.into_iter().map(|i| rank[i]).collect()
}

/// Crowding distance within each front, normalized per objective; the
/// extreme members of a front get infinity.
#[allow(clippy::needless_range_loop)]
pub fn crowding_distances(points: &[Vec<f64>], ranks: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; points.len()];
    let n_fronts = ranks.iter().max().map_or(0, |r| r + 1);
    let mut fronts: Vec<Vec<usize>> = vec![Vec::new(); n_fronts];
    for (i, &r) in ranks.iter().enumerate() {
        fronts[r].push(i);
    }
    let dims = points.first().map_or(0, Vec::len);
    for front in &mut fronts {
        if front.len() <= 2 {
            for &i in front.iter() {
                out[i] = f64::INFINITY;
            }
            continue;
        }
        for d in 0..dims {
            front.sort_by(|&a, &b| points[a][d].total_cmp(&points[b][d]).then(a.cmp(&b)));
            let first = front[0];
            let last = front[front.len() - 1];
            out[first] = f64::INFINITY;
            out[last] = f64::INFINITY;
            let range = points[last][d] - points[first][d];
            if range > 0.0 {
                for w in front.windows(3) {
                    out[w[1]] += (points[w[2]][d] - points[w[0]][d]) / range;
                }
            }
        }
    }
    out
}
