use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use super::kmeans::{kmeans_points, KMeansOptions};
use crate::points::{sq_euclidean, Points};
use crate::rng::BenchRng;
use crate::{Error, Result};

/// Above this size the embedding uses block subspace iteration instead of a
/// dense eigendecomposition.
const DENSE_EIGEN_LIMIT: usize = 1500;

/// Binary k-nearest-neighbor graph, symmetrized by union, no self loops.
pub(crate) fn knn_affinity(pts: &Points, k: usize) -> DMatrix<f64> {
    let n = pts.n();
    let k = k.min(n - 1);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut d: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (sq_euclidean(pts.row(i), pts.row(j)), j))
            .collect();
        d.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for &(_, j) in d.iter().take(k) {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
    }
    a
}

/// Gaussian affinity `exp(-gamma ||x_i - x_j||^2)` with zero diagonal.
pub(crate) fn rbf_affinity(pts: &Points, gamma: f64) -> DMatrix<f64> {
    let n = pts.n();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (-gamma * sq_euclidean(pts.row(i), pts.row(j))).exp();
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// [`knn_affinity`] over the rows of a matrix.
pub fn knn_affinity_matrix(x: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    knn_affinity(&Points::from_matrix(x), k)
}

/// [`rbf_affinity`] over the rows of a matrix.
pub fn rbf_affinity_matrix(x: &DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    rbf_affinity(&Points::from_matrix(x), gamma)
}

/// Top-`k` eigenvectors (largest eigenvalues) of a symmetric matrix as columns.
fn top_eigenvectors(m: &DMatrix<f64>, k: usize, rng: &mut BenchRng) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n <= DENSE_EIGEN_LIMIT {
        let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000)
            .ok_or_else(|| Error::Numerical("eigendecomposition did not converge".into()))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        return Ok(DMatrix::from_fn(n, k, |i, j| eig.eigenvectors[(i, order[j])]));
    }
    subspace_iteration(m, k, rng)
}

/// Block power iteration on `m + I` (spectrum shifted into [0, 2]) with
/// Rayleigh-Ritz extraction.
fn subspace_iteration(m: &DMatrix<f64>, k: usize, rng: &mut BenchRng) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let p = (k + 8).min(n);
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] += 1.0;
    }
    let mut q = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(rng));
    q = q.qr().q();
    for it in 0..2000 {
        q = (&shifted * &q).qr().q();
        if it % 10 != 9 {
            continue;
        }
        let h = q.transpose() * &shifted * &q;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let ritz = &q * &eig.eigenvectors;
        let vecs = DMatrix::from_fn(n, k, |i, j| ritz[(i, order[j])]);
        let resid = (0..k)
            .map(|j| {
                let v = vecs.column(j);
                (&shifted * v - v * eig.eigenvalues[order[j]]).norm()
            })
            .fold(0.0, f64::max);
        if resid < 1e-6 {
            return Ok(vecs);
        }
        q = ritz;
    }
    Err(Error::Numerical("subspace iteration did not converge".into()))
}

/// Ng-Jordan-Weiss spectral clustering of a symmetric non-negative affinity.
pub(crate) fn spectral_labels(a: &DMatrix<f64>, k: usize, rng: &mut BenchRng) -> Result<Vec<usize>> {
    let n = a.nrows();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let d = a.row(i).sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let norm = DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * a[(i, j)] * inv_sqrt[j]);
    let mut emb = top_eigenvectors(&norm, k, rng)?;
    for i in 0..n {
        let r = emb.row(i).norm();
        if r > 0.0 {
            emb.row_mut(i).iter_mut().for_each(|v| *v /= r);
        }
    }
    let fit = kmeans_points(&Points::from_matrix(&emb), &KMeansOptions::euclidean(k, 10), rng)?;
    Ok(fit.labels)
}
