use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::points::{compact_labels, sq_euclidean, Points};
use crate::{Error, Result};

/// Internal validity indices of one labelling, Euclidean geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalMetrics {
    pub sc_mean: f64,
    pub sc_std: f64,
    pub sc_min: f64,
    pub sc_max: f64,
    pub chi: f64,
    pub dbi: f64,
    pub sse_total: f64,
    pub sse_mean: f64,
    pub sse_std: f64,
    pub sse_max: f64,
    pub sse_min: f64,
    pub sse_explained_ratio: f64,
    pub sse_unexplained_ratio: f64,
}

impl InternalMetrics {
    pub const NAMES: [&'static str; 13] = [
        "sc_mean",
        "sc_std",
        "sc_min",
        "sc_max",
        "chi",
        "dbi",
        "sse_total",
        "sse_mean",
        "sse_std",
        "sse_max",
        "sse_min",
        "sse_explained_ratio",
        "sse_unexplained_ratio",
    ];

    /// Values in [`Self::NAMES`] order.
    pub fn to_array(&self) -> [f64; 13] {
        [
            self.sc_mean,
            self.sc_std,
            self.sc_min,
            self.sc_max,
            self.chi,
            self.dbi,
            self.sse_total,
            self.sse_mean,
            self.sse_std,
            self.sse_max,
            self.sse_min,
            self.sse_explained_ratio,
            self.sse_unexplained_ratio,
        ]
    }
}

/// Silhouette, Calinski-Harabasz, Davies-Bouldin and SSE statistics.
///
/// Samples in singleton clusters get silhouette 0; a clustering made only of
/// singletons is rejected. CHI is 1 when the within-cluster dispersion is
/// zero, and DBI ignores cluster pairs with coincident centroids.
pub fn internal_metrics(x: &DMatrix<f64>, labels: &[usize]) -> Result<InternalMetrics> {
    let n = x.nrows();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: n,
        });
    }
    if n < 3 {
        return Err(Error::invalid("internal metrics need n >= 3"));
    }
    let labels = compact_labels(labels);
    let k = labels.iter().max().map_or(0, |v| v + 1);
    if k < 2 {
        return Err(Error::invalid("internal metrics need at least two clusters"));
    }
    let pts = Points::from_matrix(x);
    let m = pts.m();
    let mut sizes = vec![0usize; k];
    for &l in &labels {
        sizes[l] += 1;
    }
    if sizes.iter().all(|&s| s == 1) {
        return Err(Error::invalid("silhouette undefined: every cluster is a singleton"));
    }

    // centroids and global mean
    let mut centroids = vec![vec![0.0; m]; k];
    let mut global = vec![0.0; m];
    for i in 0..n {
        for (j, v) in pts.row(i).iter().enumerate() {
            centroids[labels[i]][j] += v;
            global[j] += v;
        }
    }
    for (c, size) in centroids.iter_mut().zip(&sizes) {
        c.iter_mut().for_each(|v| *v /= *size as f64);
    }
    global.iter_mut().for_each(|v| *v /= n as f64);

    // silhouette
    let mut sil = Vec::with_capacity(n);
    let mut dist_sum = vec![0.0; k];
    for i in 0..n {
        dist_sum.iter_mut().for_each(|v| *v = 0.0);
        let xi = pts.row(i);
        for j in 0..n {
            if i != j {
                dist_sum[labels[j]] += sq_euclidean(xi, pts.row(j)).sqrt();
            }
        }
        let own = labels[i];
        if sizes[own] == 1 {
            sil.push(0.0);
            continue;
        }
        let a = dist_sum[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| dist_sum[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        sil.push(if denom > 0.0 { (b - a) / denom } else { 0.0 });
    }

    // SSE per cluster, within-cluster scatter for DBI
    let mut sse = vec![0.0; k];
    let mut scatter = vec![0.0; k];
    let mut tss = 0.0;
    for i in 0..n {
        let c = labels[i];
        let d2 = sq_euclidean(pts.row(i), &centroids[c]);
        sse[c] += d2;
        scatter[c] += d2.sqrt();
        tss += sq_euclidean(pts.row(i), &global);
    }
    for (s, size) in scatter.iter_mut().zip(&sizes) {
        *s /= *size as f64;
    }
    let sse_total: f64 = sse.iter().sum();

    let between: f64 = centroids
        .iter()
        .zip(&sizes)
        .map(|(c, &s)| s as f64 * sq_euclidean(c, &global))
        .sum();
    let chi = if sse_total == 0.0 || n == k {
        1.0
    } else {
        (between / (k - 1) as f64) / (sse_total / (n - k) as f64)
    };

    let mut dbi = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in 0..k {
            if i == j {
                continue;
            }
            let d = sq_euclidean(&centroids[i], &centroids[j]).sqrt();
            if d > 0.0 {
                worst = worst.max((scatter[i] + scatter[j]) / d);
            }
        }
        dbi += worst;
    }
    dbi /= k as f64;

    let explained = if tss > 0.0 { (1.0 - sse_total / tss).clamp(0.0, 1.0) } else { 0.0 };

    Ok(InternalMetrics {
        sc_mean: crate::stats::mean(&sil),
        sc_std: crate::stats::std_pop(&sil),
        sc_min: sil.iter().copied().fold(f64::INFINITY, f64::min),
        sc_max: sil.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        chi,
        dbi,
        sse_total,
        sse_mean: crate::stats::mean(&sse),
        sse_std: crate::stats::std_pop(&sse),
        sse_max: sse.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        sse_min: sse.iter().copied().fold(f64::INFINITY, f64::min),
        sse_explained_ratio: explained,
        sse_unexplained_ratio: 1.0 - explained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_tight_far_clusters() {
        // 4 points: (0,0),(0,0.1) and (10,0),(10,0.1)
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 0.0, 0.1, 10.0, 0.0, 10.0, 0.1]);
        let im = internal_metrics(&x, &[0, 0, 1, 1]).unwrap();
        // a = 0.1, b ~ 10.0002 -> s ~ 0.99
        let b = (10.0f64.powi(2) + 0.01).sqrt();
        let s = (((10.0 + b) / 2.0) - 0.1) / ((10.0 + b) / 2.0);
        assert!((im.sc_mean - s).abs() < 1e-12);
        assert!(im.sc_mean > 0.9);
        // sigma_i = 0.05 each, centroid distance 10 -> dbi = 0.01
        assert!((im.dbi - 0.01).abs() < 1e-12);
        assert!(im.dbi < 0.2);
        assert!((im.sse_total - 4.0 * 0.0025).abs() < 1e-12);
    }

    #[test]
    fn singleton_only_rejected() {
        let x = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 2.0]);
        assert!(internal_metrics(&x, &[0, 1, 2]).is_err());
        assert!(internal_metrics(&x, &[0, 0, 0]).is_err());
        assert!(internal_metrics(&x, &[0, 0, 1]).is_ok());
    }

    #[test]
    fn ratios_sum_to_one_on_random_labels() {
        let mut rng = crate::rng::rng_from_seed(4);
        let x = DMatrix::from_fn(60, 3, |_, _| {
            rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng)
        });
        let labels: Vec<usize> = (0..60).map(|i| i % 4).collect();
        let im = internal_metrics(&x, &labels).unwrap();
        assert!((im.sse_explained_ratio + im.sse_unexplained_ratio - 1.0).abs() < 1e-9);
        assert!(im.sc_min <= im.sc_mean && im.sc_mean <= im.sc_max);
        assert!(im.chi >= 0.0 && im.dbi >= 0.0);
    }

    #[test]
    fn chi_matches_direct_formula() {
        let x = DMatrix::from_row_slice(5, 1, &[0.0, 1.0, 2.0, 10.0, 12.0]);
        let im = internal_metrics(&x, &[0, 0, 0, 1, 1]).unwrap();
        // centroids 1 and 11, global 5; between = 3*16 + 2*36 = 120; within = 2 + 2 = 4
        let expected = (120.0 / 1.0) / (4.0 / 3.0);
        assert!((im.chi - expected).abs() < 1e-9);
        assert!((im.sse_explained_ratio - (1.0 - 4.0 / 124.0)).abs() < 1e-12);
    }
}
