use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::matrix::{Mask, PerformanceMatrix};
use crate::cluster::Algorithm;
use crate::sweep::algorithm_of;
use crate::{Error, Result};

/// Per-dataset maximum over each algorithm's observed configs (an N x M
/// matrix, algorithms in roster order). Entries with no observed config are
/// unobserved.
pub fn best_by_algorithm(pm: &PerformanceMatrix) -> Result<PerformanceMatrix> {
    let mut groups: BTreeMap<Algorithm, Vec<usize>> = BTreeMap::new();
    for (j, c) in pm.col_names().iter().enumerate() {
        groups.entry(algorithm_of(c)?).or_default().push(j);
    }
    let algos: Vec<Algorithm> = groups.keys().copied().collect();
    let n = pm.shape().0;
    let mut values = DMatrix::zeros(n, algos.len());
    let mut mask = Mask::empty(n, algos.len());
    for (a, algo) in algos.iter().enumerate() {
        for i in 0..n {
            let best = groups[algo]
                .iter()
                .filter_map(|&j| pm.get(i, j))
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
            if let Some(b) = best {
                values[(i, a)] = b;
                mask.set(i, a, true);
            }
        }
    }
    PerformanceMatrix::new(
        values,
        mask,
        pm.row_names().to_vec(),
        algos.iter().map(|a| a.name().to_owned()).collect(),
        pm.metric(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankTests {
    /// Mean rank per column, 1 = best.
    pub average_ranks: Vec<f64>,
    /// Two-sided paired t-test p-values, symmetric with unit diagonal.
    pub p_values: Vec<Vec<f64>>,
    /// Pairs whose differences have zero variance but a non-zero mean.
    pub degenerate: Vec<Vec<bool>>,
}

/// Per-row ranks (ties averaged), their column means, and pairwise paired
/// t-tests on the per-row score differences.
pub fn ranks_and_tests(p: &DMatrix<f64>) -> Result<RankTests> {
    let (n, m) = p.shape();
    if n < 2 {
        return Err(Error::invalid("rank tests need at least two datasets"));
    }
    if m < 2 {
        return Err(Error::invalid("rank tests need at least two algorithms"));
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("rank tests need a finite dense matrix"));
    }
    let mut avg = vec![0.0; m];
    for i in 0..n {
        let row: Vec<f64> = p.row(i).iter().copied().collect();
        for (a, r) in avg.iter_mut().zip(crate::stats::average_ranks(&row, true)) {
            *a += r;
        }
    }
    avg.iter_mut().for_each(|v| *v /= n as f64);

    let t_dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut p_values = vec![vec![1.0; m]; m];
    let mut degenerate = vec![vec![false; m]; m];
    for a in 0..m {
        for b in (a + 1)..m {
            let d: Vec<f64> = (0..n).map(|i| p[(i, a)] - p[(i, b)]).collect();
            let mean = crate::stats::mean(&d);
            let sd = crate::stats::variance_sample(&d).sqrt();
            let (pv, degen) = if sd == 0.0 {
                if mean == 0.0 {
                    (1.0, false)
                } else {
                    (0.0, true)
                }
            } else {
                let t = mean / (sd / (n as f64).sqrt());
                ((2.0 * (1.0 - t_dist.cdf(t.abs()))).clamp(0.0, 1.0), false)
            };
            p_values[a][b] = pv;
            p_values[b][a] = pv;
            degenerate[a][b] = degen;
            degenerate[b][a] = degen;
        }
    }
    Ok(RankTests {
        average_ranks: avg,
        p_values,
        degenerate,
    })
}

/// Concatenated performance vectors from per-algorithm best matrices
/// (each N x M): the algorithm view `[P_acc' | P_nmi' | P_ari']` (M x 3N)
/// and the dataset view `[P_acc | P_nmi | P_ari]` (N x 3M).
pub fn performance_vectors(acc: &DMatrix<f64>, nmi: &DMatrix<f64>, ari: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if acc.shape() != nmi.shape() || acc.shape() != ari.shape() {
        return Err(Error::invalid("metric matrices differ in shape"));
    }
    let (n, m) = acc.shape();
    let blocks = [acc, nmi, ari];
    let algo_view = DMatrix::from_fn(m, 3 * n, |a, c| blocks[c / n][(c % n, a)]);
    let data_view = DMatrix::from_fn(n, 3 * m, |i, c| blocks[c / m][(i, c % m)]);
    Ok((algo_view, data_view))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_columns_tie() {
        let p = DMatrix::from_fn(5, 3, |i, _| i as f64 / 10.0);
        let rt = ranks_and_tests(&p).unwrap();
        assert_eq!(rt.average_ranks, vec![2.0; 3]);
        assert!(rt.p_values.iter().flatten().all(|&v| v == 1.0));
    }

    #[test]
    fn dominance_is_significant() {
        let p = DMatrix::from_fn(12, 2, |i, j| {
            0.5 + 0.01 * (i * i % 7) as f64 - if j == 1 { 0.1 + 0.005 * (i % 3) as f64 } else { 0.0 }
        });
        let rt = ranks_and_tests(&p).unwrap();
        assert!(rt.average_ranks[0] < rt.average_ranks[1]);
        assert!(rt.p_values[0][1] < 0.05);
    }

    #[test]
    fn zero_variance_marker() {
        let p = DMatrix::from_row_slice(4, 2, &[0.5, 0.4, 0.6, 0.5, 0.7, 0.6, 0.8, 0.7]);
        let rt = ranks_and_tests(&p).unwrap();
        // differences are 0.1 up to rounding; the guard needs them bit-equal
        let q = DMatrix::from_row_slice(4, 2, &[0.5, 0.25, 0.75, 0.5, 1.0, 0.75, 0.25, 0.0]);
        let rq = ranks_and_tests(&q).unwrap();
        assert_eq!(rq.p_values[0][1], 0.0);
        assert!(rq.degenerate[0][1]);
        assert!(rt.p_values[0][1] < 1e-3);
    }

    #[test]
    fn vector_shapes_and_blocks() {
        let acc = DMatrix::from_fn(3, 2, |i, j| (10 * i + j) as f64);
        let nmi = acc.map(|v| v + 100.0);
        let ari = acc.map(|v| v + 200.0);
        let (av, dv) = performance_vectors(&acc, &nmi, &ari).unwrap();
        assert_eq!(av.shape(), (2, 9));
        assert_eq!(dv.shape(), (3, 6));
        assert_eq!(av[(1, 0)], acc[(0, 1)]);
        assert_eq!(av[(1, 3 + 2)], nmi[(2, 1)]);
        assert_eq!(dv[(2, 4 + 1)], ari[(2, 1)]);
    }
}
