use nalgebra::DMatrix;

use super::kmeans::{kmeans_points, KMeansOptions};
use crate::points::{dot, Points};
use crate::rng::BenchRng;
use crate::Result;

const MAX_ITER: usize = 50;

/// Affine subspace: a center plus orthonormal basis rows.
struct Subspace {
    center: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

impl Subspace {
    fn residual(&self, x: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let total: f64 = dot(&d, &d);
        let proj: f64 = self.basis.iter().map(|b| dot(b, &d).powi(2)).sum();
        (total - proj).max(0.0)
    }

    fn fit(pts: &Points, members: &[usize], dim: usize) -> Subspace {
        let m = pts.m();
        let mut center = vec![0.0; m];
        for &i in members {
            center.iter_mut().zip(pts.row(i)).for_each(|(a, b)| *a += b);
        }
        center.iter_mut().for_each(|v| *v /= members.len() as f64);
        let dim = dim.min(members.len().saturating_sub(1));
        if dim == 0 {
            return Subspace { center, basis: Vec::new() };
        }
        let block = DMatrix::from_fn(members.len(), m, |r, c| pts.row(members[r])[c] - center[c]);
        let svd = block.svd(false, true);
        let vt = svd.v_t.expect("requested right singular vectors");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let basis = order
            .into_iter()
            .take(dim)
            .filter(|&j| svd.singular_values[j] > 1e-12)
            .map(|j| vt.row(j).iter().copied().collect())
            .collect();
        Subspace { center, basis }
    }
}

#[derive(Clone, Debug)]
pub struct KpcFit {
    pub labels: Vec<usize>,
    /// Total residual of (previous labels, new assignment) against the same
    /// fitted subspaces, one pair per assignment step.
    #[cfg_attr(not(test), allow(dead_code))]
    pub assignment_steps: Vec<(f64, f64)>,
}

/// Subspace dimension actually used for `m` features.
pub(crate) fn effective_dim(d: usize, m: usize) -> usize {
    d.min(m.saturating_sub(1))
}

/// K-plane style clustering into `k` affine subspaces of dimension `d`.
pub(crate) fn kpc(pts: &Points, k: usize, d: usize, rng: &mut BenchRng) -> Result<KpcFit> {
    let n = pts.n();
    let dim = effective_dim(d, pts.m());
    let mut labels = kmeans_points(pts, &KMeansOptions::euclidean(k, 1), rng)?.labels;
    let mut steps = Vec::new();
    for _ in 0..MAX_ITER {
        let mut members = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(i);
        }
        let subs: Vec<Option<Subspace>> = members
            .iter()
            .map(|mem| (!mem.is_empty()).then(|| Subspace::fit(pts, mem, dim)))
            .collect();
        let before: f64 = (0..n)
            .map(|i| subs[labels[i]].as_ref().expect("own cluster non-empty").residual(pts.row(i)))
            .sum();
        let mut next = vec![0usize; n];
        let mut own = vec![0.0; n];
        for i in 0..n {
            let x = pts.row(i);
            let mut best = (labels[i], subs[labels[i]].as_ref().expect("non-empty").residual(x));
            for (c, s) in subs.iter().enumerate() {
                if let Some(s) = s {
                    let r = s.residual(x);
                    if r < best.1 {
                        best = (c, r);
                    }
                }
            }
            next[i] = best.0;
            own[i] = best.1;
        }
        let after: f64 = own.iter().sum();
        steps.push((before, after));
        super::kmeans::repair_empty(&mut next, &mut own, k);
        if next == labels {
            break;
        }
        labels = next;
    }
    Ok(KpcFit {
        labels,
        assignment_steps: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn assignment_never_increases_residual() {
        for seed in 0..10 {
            let mut rng = rng_from_seed(seed);
            let rows: Vec<Vec<f64>> = (0..120)
                .map(|i| {
                    let t: f64 = rng.random_range(-3.0..3.0);
                    let noise: f64 = rng.random_range(-0.1..0.1);
                    match i % 3 {
                        0 => vec![t, 0.5 * t + noise, noise],
                        1 => vec![noise, t, -t + noise],
                        _ => vec![t + noise, -t, 2.0],
                    }
                })
                .collect();
            let pts = Points::from_rows(&rows);
            let fit = kpc(&pts, 3, 1, &mut rng).unwrap();
            for (before, after) in &fit.assignment_steps {
                assert!(after <= before, "{after} > {before}");
            }
        }
    }

    #[test]
    fn dimension_clamped_by_features() {
        assert_eq!(effective_dim(5, 2), 1);
        assert_eq!(effective_dim(5, 1), 0);
        assert_eq!(effective_dim(5, 30), 5);
    }
}
