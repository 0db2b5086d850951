use rayon::prelude::*;

use super::{canonical_rows, Builder, MetaVector};
use crate::cluster::DistanceMetric;
use crate::cluster::{kmeans_points, KMeansOptions, Lloyd};
use crate::data::Dataset;
use crate::metrics::{internal_metrics, InternalMetrics};
use crate::points::{sq_euclidean, Points};
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

pub const DEFAULT_K_SET: [usize; 10] = [2, 4, 6, 8, 10, 12, 14, 16, 18, 20];
pub const LANDMARK_N_INIT: usize = 10;
const MAX_ITER: usize = 500;

/// Internal validity indices of KMeans (k-means++, Euclidean, best of 10)
/// for every K in `k_set`, K-major. K values above `n - 1` are imputed and
/// flagged.
///
/// The per-K fits run concurrently. Afterwards a K whose SSE exceeds that of
/// the previous K is refit from the previous centers plus the samples
/// farthest from them, keeping whichever SSE is lower, so SSE never
/// increases along `k_set`.
pub fn landmarker_features(d: &Dataset, k_set: &[usize], seed: u64) -> Result<MetaVector> {
    landmark_block(&canonical_rows(d.x()), k_set, seed)
}

pub(crate) fn landmark_block(pts: &Points, k_set: &[usize], seed: u64) -> Result<MetaVector> {
    if k_set.is_empty() {
        return Err(Error::invalid("landmarker K set is empty"));
    }
    if k_set[0] < 2 || k_set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "landmarker K set must be strictly increasing and start at 2 or more",
        ));
    }
    let fits: Vec<Option<Vec<usize>>> = k_set.par_iter().map(|&k| fit_labels(pts, k, seed)).collect::<Result<_>>()?;
    let fits = enforce_monotone_sse(pts, k_set, fits)?;

    let x = pts.to_matrix();
    let mut b = Builder::default();
    for (&k, fit) in k_set.iter().zip(&fits) {
        let tag = format!("landmark/k={k}");
        let metrics = match fit {
            Some(labels) => internal_metrics(&x, labels).ok(),
            None => None,
        };
        let values = metrics.as_ref().map(InternalMetrics::to_array);
        for (i, name) in InternalMetrics::NAMES.iter().enumerate() {
            b.push(format!("lm_k{k}_{name}"), &tag, values.map(|v| v[i]), false);
        }
    }
    b.finish()
}

/// Best-of-10 KMeans labels for `k`, or `None` when `k > n - 1`.
pub(crate) fn fit_labels(pts: &Points, k: usize, seed: u64) -> Result<Option<Vec<usize>>> {
    if k + 1 > pts.n() {
        return Ok(None);
    }
    let mut rng = rng_from_seed(derive_seed(seed, &["landmark", &k.to_string()]));
    let mut opts = KMeansOptions::euclidean(k, LANDMARK_N_INIT);
    opts.max_iter = MAX_ITER;
    Ok(Some(kmeans_points(pts, &opts, &mut rng)?.labels))
}

fn enforce_monotone_sse(pts: &Points, k_set: &[usize], mut fits: Vec<Option<Vec<usize>>>) -> Result<Vec<Option<Vec<usize>>>> {
    let lloyd = Lloyd::new(pts, DistanceMetric::Euclidean)?;
    for idx in 1..fits.len() {
        let (Some(prev), Some(cur)) = (&fits[idx - 1], &fits[idx]) else {
            continue;
        };
        let (prev_centers, prev_sse) = means_and_sse(pts, prev);
        let (_, cur_sse) = means_and_sse(pts, cur);
        if cur_sse <= prev_sse {
            continue;
        }
        let centers = extend_farthest(pts, prev_centers, k_set[idx]);
        let warm = lloyd.run_from_centers(centers, MAX_ITER);
        let (_, warm_sse) = means_and_sse(pts, &warm.labels);
        if warm_sse < cur_sse {
            fits[idx] = Some(warm.labels);
        }
    }
    Ok(fits)
}

/// Cluster means and the SSE of a labelling around them.
fn means_and_sse(pts: &Points, labels: &[usize]) -> (Vec<Vec<f64>>, f64) {
    let k = labels.iter().max().map_or(0, |v| v + 1);
    let m = pts.m();
    let mut means = vec![vec![0.0; m]; k];
    let mut sizes = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        sizes[l] += 1;
        for (acc, v) in means[l].iter_mut().zip(pts.row(i)) {
            *acc += v;
        }
    }
    for (c, &s) in means.iter_mut().zip(&sizes) {
        if s > 0 {
            c.iter_mut().for_each(|v| *v /= s as f64);
        }
    }
    let sse = labels.iter().enumerate().map(|(i, &l)| sq_euclidean(pts.row(i), &means[l])).sum();
    (means.into_iter().zip(sizes).filter(|(_, s)| *s > 0).map(|(c, _)| c).collect(), sse)
}

/// Greedily adds the samples farthest from the current centers until there
/// are `k` of them.
fn extend_farthest(pts: &Points, mut centers: Vec<Vec<f64>>, k: usize) -> Vec<Vec<f64>> {
    let n = pts.n();
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| centers.iter().map(|c| sq_euclidean(pts.row(i), c)).fold(f64::INFINITY, f64::min))
        .collect();
    while centers.len() < k {
        let far = (0..n)
            .max_by(|&a, &b| nearest[a].total_cmp(&nearest[b]).then(b.cmp(&a)))
            .expect("n >= 1");
        let c = pts.row(far).to_vec();
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_euclidean(pts.row(i), &c));
        }
        centers.push(c);
    }
    centers
}
