use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;

use super::kmeans::{repair_empty, Init};
use crate::points::{dot, sq_euclidean, Points};
use crate::rng::BenchRng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    #[cfg_attr(not(test), allow(dead_code))]
    Linear,
    Rbf {
        gamma: f64,
    },
}

pub fn kernel_matrix(pts: &Points, kernel: Kernel) -> DMatrix<f64> {
    let n = pts.n();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = match kernel {
                Kernel::Linear => dot(pts.row(i), pts.row(j)),
                Kernel::Rbf { gamma } => (-gamma * sq_euclidean(pts.row(i), pts.row(j))).exp(),
            };
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

#[derive(Clone, Debug)]
pub struct KernelFit {
    pub labels: Vec<usize>,
    pub objective: f64,
}

/// Feature-space distance between sample `i` and sample `j`.
#[inline]
fn point_dist(km: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    (km[(i, i)] - 2.0 * km[(i, j)] + km[(j, j)]).max(0.0)
}

/// k-means++ seeding with feature-space distances.
pub(crate) fn init_indices(km: &DMatrix<f64>, k: usize, init: Init, rng: &mut BenchRng) -> Vec<usize> {
    let n = km.nrows();
    match init {
        Init::Random => index::sample(rng, n, k).into_vec(),
        Init::KMeansPlusPlus => {
            let mut chosen = vec![rng.random_range(0..n)];
            let mut best: Vec<f64> = (0..n).map(|i| point_dist(km, i, chosen[0])).collect();
            while chosen.len() < k {
                let total: f64 = best.iter().sum();
                let next = if total > 0.0 {
                    let mut target = rng.random::<f64>() * total;
                    let mut pick = None;
                    for (i, &w) in best.iter().enumerate() {
                        if w <= 0.0 {
                            continue;
                        }
                        if target < w {
                            pick = Some(i);
                            break;
                        }
                        target -= w;
                    }
                    pick.unwrap_or_else(|| best.iter().rposition(|&w| w > 0.0).expect("positive mass"))
                } else {
                    let rest: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                    rest[rng.random_range(0..rest.len())]
                };
                chosen.push(next);
                for (i, b) in best.iter_mut().enumerate() {
                    *b = b.min(point_dist(km, i, next));
                }
            }
            chosen
        }
    }
}

/// Lloyd iterations in kernel feature space; centers are implicit member sets.
pub fn kernel_lloyd(km: &DMatrix<f64>, init: &[usize], max_iter: usize) -> KernelFit {
    let n = km.nrows();
    let k = init.len();
    let mut members: Vec<Vec<usize>> = init.iter().map(|&i| vec![i]).collect();
    let mut labels = vec![usize::MAX; n];
    let mut objective = f64::INFINITY;
    for _ in 0..max_iter.max(1) {
        // ||phi(x_i) - mu_c||^2 = K_ii - 2/|c| sum_j K_ij + 1/|c|^2 sum_jl K_jl
        let self_terms: Vec<f64> = members
            .iter()
            .map(|s| {
                let mut t = 0.0;
                for &a in s {
                    for &b in s {
                        t += km[(a, b)];
                    }
                }
                t / (s.len() * s.len()) as f64
            })
            .collect();
        let mut new_labels = vec![0usize; n];
        let mut own = vec![0.0; n];
        for i in 0..n {
            let (mut bc, mut bd) = (0, f64::INFINITY);
            for (c, s) in members.iter().enumerate() {
                let cross: f64 = s.iter().map(|&j| km[(i, j)]).sum::<f64>() / s.len() as f64;
                let d = (km[(i, i)] - 2.0 * cross + self_terms[c]).max(0.0);
                if d < bd {
                    bd = d;
                    bc = c;
                }
            }
            new_labels[i] = bc;
            own[i] = bd;
        }
        repair_empty(&mut new_labels, &mut own, k);
        objective = own.iter().sum();
        if new_labels == labels {
            break;
        }
        labels = new_labels;
        let mut next = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            next[l].push(i);
        }
        for (c, s) in next.into_iter().enumerate() {
            if !s.is_empty() {
                members[c] = s;
            }
        }
    }
    KernelFit { labels, objective }
}

pub fn kernel_kmeans(km: &DMatrix<f64>, k: usize, init: Init, n_init: usize, max_iter: usize, rng: &mut BenchRng) -> KernelFit {
    let mut best: Option<KernelFit> = None;
    for _ in 0..n_init.max(1) {
        let idx = init_indices(km, k, init, rng);
        let fit = kernel_lloyd(km, &idx, max_iter);
        if best.as_ref().is_none_or(|b| fit.objective < b.objective) {
            best = Some(fit);
        }
    }
    best.expect("n_init >= 1")
}
