use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::matrix::Mask;
use crate::metrics::Metric;
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

/// Singular values in non-increasing order.
pub fn singular_values(p: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = p.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Cumulative contribution ratio of the leading `j` singular values.
pub fn ccr(p: &DMatrix<f64>, j: usize) -> Result<f64> {
    let full = p.nrows().min(p.ncols());
    if j == 0 || j > full {
        return Err(Error::invalid(format!("j must be in 1..={full}")));
    }
    Ok(ccr_curve(p)?[j - 1])
}

/// `ccr(1..=min(N, H))`; the last entry is exactly 1.
pub fn ccr_curve(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("ccr needs a finite dense matrix"));
    }
    let s = singular_values(p);
    let mut prefix = Vec::with_capacity(s.len());
    let mut acc = 0.0;
    for v in &s {
        acc += v;
        prefix.push(acc);
    }
    let total = acc;
    if !(total > 0.0) {
        return Err(Error::invalid("ccr undefined for the zero matrix"));
    }
    Ok(prefix.into_iter().map(|v| v / total).collect())
}

/// Hides exactly `round(mr * observed)` observed entries, chosen by a seeded
/// shuffle, so that every row and column keeps an observation.
pub fn mcar_mask(observed: &Mask, mr: f64, seed: u64) -> Result<Mask> {
    if !(mr > 0.0 && mr < 1.0) {
        return Err(Error::invalid("mr must be in (0,1)"));
    }
    let (n, h) = observed.shape();
    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..h).map(move |j| (i, j)))
        .filter(|&(i, j)| observed.get(i, j))
        .collect();
    let hide = (mr * cells.len() as f64).round() as usize;
    for attempt in 0..100u32 {
        let mut rng = rng_from_seed(derive_seed(seed, &["mcar", &attempt.to_string()]));
        let mut order = cells.clone();
        order.shuffle(&mut rng);
        let mut mask = observed.clone();
        for &(i, j) in order.iter().take(hide) {
            mask.set(i, j, false);
        }
        if mask.row_counts().iter().all(|&c| c > 0) && mask.col_counts().iter().all(|&c| c > 0) {
            return Ok(mask);
        }
    }
    Err(Error::invalid("could not draw a mask leaving every row and column observed"))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompletionOptions {
    pub rank: usize,
    pub iters: usize,
    pub tol: f64,
    pub ridge: f64,
}

impl Default for CompletionOptions {
    fn default() -> Self {
        CompletionOptions {
            rank: 60,
            iters: 500,
            tol: 1e-9,
            ridge: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Factorization {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    /// Observed squared residual at initialization and after every half-step.
    pub trace: Vec<f64>,
    pub iters: usize,
}

impl Factorization {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u * self.v.transpose()
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }
}

fn observed_residual(p: &DMatrix<f64>, mask: &Mask, u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    let fit = u * v.transpose();
    let mut total = 0.0;
    for j in 0..p.ncols() {
        for i in 0..p.nrows() {
            if mask.get(i, j) {
                total += (fit[(i, j)] - p[(i, j)]).powi(2);
            }
        }
    }
    total
}

/// Ridge solve for one factor row against the observed entries of a line.
/// Keeps the old row when the solve would not lower that line's residual.
fn update_line(target: impl Fn(usize) -> Option<f64>, len: usize, other: &DMatrix<f64>, old: DVector<f64>, ridge: f64) -> DVector<f64> {
    let r = other.ncols();
    let obs: Vec<(usize, f64)> = (0..len).filter_map(|k| target(k).map(|y| (k, y))).collect();
    let a = DMatrix::from_fn(obs.len(), r, |row, c| other[(obs[row].0, c)]);
    let y = DVector::from_iterator(obs.len(), obs.iter().map(|&(_, y)| y));
    let mut gram = a.tr_mul(&a);
    for d in 0..r {
        gram[(d, d)] += ridge;
    }
    let rhs = a.tr_mul(&y);
    let Some(new) = gram.cholesky().map(|c| c.solve(&rhs)) else {
        return old;
    };
    let loss = |x: &DVector<f64>| (&a * x - &y).norm_squared();
    if loss(&new) <= loss(&old) {
        new
    } else {
        old
    }
}

/// Rank-`r` completion by alternating ridge least squares on the observed
/// entries, initialized from the truncated SVD of the zero-filled matrix.
///
/// Every half-step keeps, per row or column, whichever factor row fits its
/// observed entries better, so the observed residual never increases.
pub fn complete(p: &DMatrix<f64>, mask: &Mask, opts: &CompletionOptions) -> Result<Factorization> {
    let (n, h) = p.shape();
    if mask.shape() != (n, h) {
        return Err(Error::LengthMismatch {
            left: n * h,
            right: mask.shape().0 * mask.shape().1,
        });
    }
    let r = opts.rank;
    if r == 0 || r > n.min(h) {
        return Err(Error::invalid(format!("rank {r} must be in 1..={}", n.min(h))));
    }
    if mask.row_counts().contains(&0) || mask.col_counts().contains(&0) {
        return Err(Error::invalid("every row and column needs an observed entry"));
    }
    let zero_filled = DMatrix::from_fn(n, h, |i, j| if mask.get(i, j) { p[(i, j)] } else { 0.0 });
    let svd = zero_filled.svd(true, true);
    let (uu, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut u = DMatrix::from_fn(n, r, |i, k| uu[(i, order[k])] * svd.singular_values[order[k]].sqrt());
    let mut v = DMatrix::from_fn(h, r, |j, k| vt[(order[k], j)] * svd.singular_values[order[k]].sqrt());

    let mut trace = vec![observed_residual(p, mask, &u, &v)];
    let mut iters = 0;
    for _ in 0..opts.iters {
        iters += 1;
        for i in 0..n {
            let new = update_line(|j| mask.get(i, j).then(|| p[(i, j)]), h, &v, u.row(i).transpose(), opts.ridge);
            u.set_row(i, &new.transpose());
        }
        trace.push(observed_residual(p, mask, &u, &v));
        for j in 0..h {
            let new = update_line(|i| mask.get(i, j).then(|| p[(i, j)]), n, &u, v.row(j).transpose(), opts.ridge);
            v.set_row(j, &new.transpose());
        }
        let now = observed_residual(p, mask, &u, &v);
        let before = trace[trace.len() - 2];
        trace.push(now);
        if before <= f64::MIN_POSITIVE || (before - now) / before < opts.tol {
            break;
        }
    }
    Ok(Factorization { u, v, trace, iters })
}

/// Mean of `|pred - truth| / max(|truth|, floor)` over the evaluated entries.
pub fn mape(truth: &DMatrix<f64>, pred: &DMatrix<f64>, eval: &Mask, floor: f64) -> Result<f64> {
    if truth.shape() != pred.shape() || eval.shape() != truth.shape() {
        return Err(Error::invalid("mape inputs have different shapes"));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..truth.nrows() {
        for j in 0..truth.ncols() {
            if eval.get(i, j) {
                let t = truth[(i, j)];
                total += (pred[(i, j)] - t).abs() / t.abs().max(floor);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::invalid("mape over an empty evaluation set"));
    }
    Ok(total / count as f64)
}

pub const MAPE_FLOOR: f64 = 1e-3;

/// Clamps reconstructed scores to the metric's valid range.
pub fn clamp_to_metric(m: &DMatrix<f64>, metric: Metric) -> DMatrix<f64> {
    let (lo, hi) = metric.range();
    m.map(|v| v.clamp(lo, hi))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionReport {
    pub r: usize,
    pub iters: usize,
    pub mr: f64,
    pub mape_mean: f64,
    /// Sample standard deviation over seeds (0 for a single seed).
    pub mape_std: f64,
    pub seeds: Vec<u64>,
    pub mape_per_seed: Vec<f64>,
}

/// Masks a dense matrix at rate `mr` once per seed, completes it and scores
/// the hidden entries after clamping.
pub fn completion_experiment(
    p: &DMatrix<f64>,
    metric: Metric,
    mr: f64,
    seeds: &[u64],
    opts: &CompletionOptions,
) -> Result<CompletionReport> {
    if seeds.is_empty() {
        return Err(Error::invalid("at least one seed is required"));
    }
    let full = Mask::full(p.nrows(), p.ncols());
    let mut scores = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mask = mcar_mask(&full, mr, seed)?;
        let fit = complete(p, &mask, opts)?;
        let pred = clamp_to_metric(&fit.reconstruct(), metric);
        scores.push(mape(p, &pred, &full.minus(&mask), MAPE_FLOOR)?);
    }
    let mean = crate::stats::mean(&scores);
    let std = if scores.len() > 1 {
        crate::stats::variance_sample(&scores).sqrt()
    } else {
        0.0
    };
    Ok(CompletionReport {
        r: opts.rank,
        iters: opts.iters,
        mr,
        mape_mean: mean,
        mape_std: std,
        seeds: seeds.to_vec(),
        mape_per_seed: scores,
    })
}
