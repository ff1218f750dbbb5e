//! Random initialization, crossover and mutation of chromosomes.

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::plan::{Chromosome, PlanningContext};
use crate::scenario::{task_sensor_set, SensorKind};

type TaskGenes = (Vec<usize>, Vec<usize>, Vec<SensorKind>);

/// Draws the UAVs, approach profiles and sensors of one task.
///
/// UAVs are drawn among the sensor-compatible ones; when too few exist the
/// whole fleet is used and the fitness gate rejects the result.
pub fn sample_task<R: Rng + ?Sized>(ctx: &PlanningContext, task: usize, rng: &mut R) -> TaskGenes {
    let s = ctx.scenario();
    let k = s.tasks[task].required_uav_count();
    let compatible = ctx.compatible_uavs(task);
    let all: Vec<usize>;
    let pool = if compatible.len() >= k {
        compatible
    } else {
        all = (0..s.uavs.len()).collect();
        &all
    };
    let uavs: Vec<usize> = index::sample(rng, pool.len(), k)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    let profiles = uavs
        .iter()
        .map(|&u| rng.random_range(0..s.uavs[u].profiles.len()))
        .collect();
    let sensors = uavs
        .iter()
        .map(|&u| {
            let valid = ctx.valid_sensors(task, u);
            let domain = if valid.is_empty() {
                task_sensor_set(s.tasks[task].kind)
            } else {
                valid
            };
            domain[rng.random_range(0..domain.len())]
        })
        .collect();
    (uavs, profiles, sensors)
}

fn sample_uav<R: Rng + ?Sized>(
    ctx: &PlanningContext,
    uav: usize,
    rng: &mut R,
) -> (Option<usize>, usize) {
    let gcs = Some(rng.random_range(0..ctx.n_gcss()));
    let ret = rng.random_range(0..ctx.scenario().uavs[uav].profiles.len());
    (gcs, ret)
}

pub fn random_chromosome<R: Rng + ?Sized>(ctx: &PlanningContext, rng: &mut R) -> Chromosome {
    let (n, m) = (ctx.n_tasks(), ctx.n_uavs());
    let mut c = Chromosome {
        assign: Vec::with_capacity(n),
        order: (0..n).collect(),
        gcs: Vec::with_capacity(m),
        path_profile: Vec::with_capacity(n),
        sensor: Vec::with_capacity(n),
        return_profile: Vec::with_capacity(m),
    };
    for t in 0..n {
        let (u, p, s) = sample_task(ctx, t, rng);
        c.assign.push(u);
        c.path_profile.push(p);
        c.sensor.push(s);
    }
    c.order.shuffle(rng);
    for u in 0..m {
        let (g, r) = sample_uav(ctx, u, rng);
        c.gcs.push(g);
        c.return_profile.push(r);
    }
    c
}

/// `size` independent random chromosomes.
pub fn init_population<R: Rng + ?Sized>(
    ctx: &PlanningContext,
    size: usize,
    rng: &mut R,
) -> Vec<Chromosome> {
    (0..size).map(|_| random_chromosome(ctx, rng)).collect()
}

fn cut_points<R: Rng + ?Sized>(len: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..len);
    let b = rng.random_range(0..len);
    (a.min(b), a.max(b))
}

/// Partially matched crossover: each child keeps its own parent's values in
/// `lo..=hi` and takes the remaining positions from the other parent,
/// following the swatch mapping to avoid duplicates.
pub fn pmx(p1: &[usize], p2: &[usize], lo: usize, hi: usize) -> (Vec<usize>, Vec<usize>) {
    (pmx_child(p1, p2, lo, hi), pmx_child(p2, p1, lo, hi))
}

fn pmx_child(keep: &[usize], donor: &[usize], lo: usize, hi: usize) -> Vec<usize> {
    let n = keep.len();
    let mut pos_in_keep = vec![0; n];
    for (i, &v) in keep.iter().enumerate() {
        pos_in_keep[v] = i;
    }
    let in_swatch = |v: usize| (lo..=hi).contains(&pos_in_keep[v]);
    let mut child = donor.to_vec();
    child[lo..=hi].copy_from_slice(&keep[lo..=hi]);
    for i in (0..lo).chain(hi + 1..n) {
        let mut v = donor[i];
        while in_swatch(v) {
            v = donor[pos_in_keep[v]];
        }
        child[i] = v;
    }
    child
}

/// Two children from two parents. Task-indexed alleles 1, 4 and 5 swap one
/// shared segment, the task order undergoes PMX, and UAV-indexed alleles 3
/// and 6 swap a third segment.
pub fn crossover<R: Rng + ?Sized>(
    p1: &Chromosome,
    p2: &Chromosome,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    let (mut c1, mut c2) = (p1.clone(), p2.clone());
    let n = p1.order.len();
    let m = p1.gcs.len();
    if n > 0 {
        let (lo, hi) = cut_points(n, rng);
        for t in lo..=hi {
            std::mem::swap(&mut c1.assign[t], &mut c2.assign[t]);
            std::mem::swap(&mut c1.path_profile[t], &mut c2.path_profile[t]);
            std::mem::swap(&mut c1.sensor[t], &mut c2.sensor[t]);
        }
        let (lo, hi) = cut_points(n, rng);
        let (o1, o2) = pmx(&p1.order, &p2.order, lo, hi);
        c1.order = o1;
        c2.order = o2;
    }
    if m > 0 {
        let (lo, hi) = cut_points(m, rng);
        for u in lo..=hi {
            std::mem::swap(&mut c1.gcs[u], &mut c2.gcs[u]);
            std::mem::swap(&mut c1.return_profile[u], &mut c2.return_profile[u]);
        }
    }
    (c1, c2)
}

/// Moves the value at `second` to just after position `first`.
pub fn insert_move(perm: &mut Vec<usize>, first: usize, second: usize) {
    let (a, b) = (first.min(second), first.max(second));
    if a == b {
        return;
    }
    let v = perm.remove(b);
    perm.insert(a + 1, v);
}

/// Each of the three operator groups fires independently with probability `pm`.
pub fn mutate<R: Rng + ?Sized>(ctx: &PlanningContext, c: &mut Chromosome, pm: f64, rng: &mut R) {
    let n = c.order.len();
    if n > 0 && rng.random_bool(pm) {
        let t = rng.random_range(0..n);
        let (u, p, s) = sample_task(ctx, t, rng);
        c.assign[t] = u;
        c.path_profile[t] = p;
        c.sensor[t] = s;
    }
    if n > 1 && rng.random_bool(pm) {
        let picked = index::sample(rng, n, 2);
        insert_move(&mut c.order, picked.index(0), picked.index(1));
    }
    if !c.gcs.is_empty() && rng.random_bool(pm) {
        let u = rng.random_range(0..c.gcs.len());
        let (g, r) = sample_uav(ctx, u, rng);
        c.gcs[u] = g;
        c.return_profile[u] = r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmx_trace() {
        let (c1, c2) = pmx(&[0, 1, 2, 3, 4], &[4, 3, 2, 1, 0], 1, 2);
        assert_eq!(c1, vec![4, 1, 2, 3, 0]);
        let mut sorted = c2.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn insert_example() {
        let mut p = vec![0, 1, 2, 3, 4];
        insert_move(&mut p, 0, 3);
        assert_eq!(p, vec![0, 3, 1, 2, 4]);
        let mut q = vec![0, 1, 2, 3, 4];
        insert_move(&mut q, 3, 0);
        assert_eq!(q, vec![0, 3, 1, 2, 4]);
    }
}
