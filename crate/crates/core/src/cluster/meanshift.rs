use std::collections::BTreeMap;

use crate::points::{sq_euclidean, Points};
use crate::{Error, Result};

const MAX_SHIFTS: usize = 300;

/// Flat-kernel mean shift with binned seeding.
///
/// Seeds are the centers of grid bins (side `bandwidth`) holding at least
/// `min_bin_freq` samples. Converged modes closer than `bandwidth / 2` to a
/// stronger mode are dropped, and every sample joins its nearest mode.
pub(crate) fn mean_shift(pts: &Points, bandwidth: f64, min_bin_freq: usize) -> Result<Vec<usize>> {
    let (n, m) = (pts.n(), pts.m());
    let mut bins: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    for i in 0..n {
        let key: Vec<i64> = pts.row(i).iter().map(|v| (v / bandwidth).round() as i64).collect();
        *bins.entry(key).or_default() += 1;
    }
    let seeds: Vec<Vec<f64>> = bins
        .into_iter()
        .filter(|(_, c)| *c >= min_bin_freq)
        .map(|(k, _)| k.iter().map(|&v| v as f64 * bandwidth).collect())
        .collect();
    if seeds.is_empty() {
        return Err(Error::DegenerateGeometry(format!(
            "no bin holds min_bin_freq={min_bin_freq} samples"
        )));
    }

    let bw2 = bandwidth * bandwidth;
    let stop = 1e-3 * bandwidth;
    let mut modes: Vec<(Vec<f64>, usize)> = Vec::new();
    for seed in seeds {
        let mut c = seed;
        let mut count = 0;
        for _ in 0..MAX_SHIFTS {
            let mut sum = vec![0.0; m];
            count = 0;
            for i in 0..n {
                let x = pts.row(i);
                if sq_euclidean(x, &c) <= bw2 {
                    sum.iter_mut().zip(x).for_each(|(a, b)| *a += b);
                    count += 1;
                }
            }
            if count == 0 {
                break;
            }
            sum.iter_mut().for_each(|v| *v /= count as f64);
            let moved = sq_euclidean(&sum, &c).sqrt();
            c = sum;
            if moved < stop {
                break;
            }
        }
        if count > 0 {
            modes.push((c, count));
        }
    }
    if modes.is_empty() {
        return Err(Error::DegenerateGeometry("every mean-shift seed lost its support".into()));
    }
    // stable: equal intensities keep seed order
    modes.sort_by_key(|m| std::cmp::Reverse(m.1));
    let merge2 = (bandwidth / 2.0).powi(2);
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for (c, _) in modes {
        if kept.iter().all(|k| sq_euclidean(k, &c) >= merge2) {
            kept.push(c);
        }
    }
    Ok((0..n)
        .map(|i| {
            let x = pts.row(i);
            let mut best = (0, f64::INFINITY);
            for (j, k) in kept.iter().enumerate() {
                let d = sq_euclidean(x, k);
                if d < best.1 {
                    best = (j, d);
                }
            }
            best.0
        })
        .collect())
}
