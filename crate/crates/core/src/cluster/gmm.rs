use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;

use super::distance::DistanceMetric;
use super::kmeans::{kmeans_points, Init, KMeansOptions, Lloyd};
use crate::points::{sq_euclidean, Points};
use crate::rng::BenchRng;
use crate::{Error, Result};

const REG: f64 = 1e-6;
const TOL: f64 = 1e-6;
const MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Covariance {
    Full,
    Spherical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GmmInit {
    KMeans,
    KMeansPlusPlus,
    Random,
}

enum Shape {
    Full(Vec<Cholesky<f64, Dyn>>),
    Spherical(Vec<f64>),
}

struct Params {
    log_weights: Vec<f64>,
    means: Vec<DVector<f64>>,
    shape: Shape,
}

#[derive(Clone, Debug)]
pub struct GmmFit {
    pub labels: Vec<usize>,
    /// Mean per-sample log-likelihood after every E-step.
    #[cfg_attr(not(test), allow(dead_code))]
    pub trace: Vec<f64>,
}

fn m_step(x: &DMatrix<f64>, resp: &DMatrix<f64>, cov: Covariance) -> Result<Params> {
    let (n, m) = x.shape();
    let k = resp.ncols();
    let eps10 = 10.0 * f64::EPSILON;
    let nk: Vec<f64> = (0..k).map(|c| resp.column(c).sum() + eps10).collect();
    let means: Vec<DVector<f64>> = (0..k).map(|c| (x.transpose() * resp.column(c)) / nk[c]).collect();
    let log_weights = nk.iter().map(|v| (v / n as f64).ln()).collect();
    let shape = match cov {
        Covariance::Full => {
            let mut chols = Vec::with_capacity(k);
            for c in 0..k {
                let mut s = DMatrix::zeros(m, m);
                for i in 0..n {
                    let r = resp[(i, c)];
                    if r == 0.0 {
                        continue;
                    }
                    let d = x.row(i).transpose() - &means[c];
                    s.ger(r, &d, &d, 1.0);
                }
                s /= nk[c];
                for j in 0..m {
                    s[(j, j)] += REG;
                }
                let ch =
                    Cholesky::new(s).ok_or_else(|| Error::Numerical("covariance not positive definite after regularization".into()))?;
                chols.push(ch);
            }
            Shape::Full(chols)
        }
        Covariance::Spherical => {
            let vars = (0..k)
                .map(|c| {
                    let mut acc = 0.0;
                    for i in 0..n {
                        let d = x.row(i).transpose() - &means[c];
                        acc += resp[(i, c)] * d.norm_squared();
                    }
                    acc / (nk[c] * m as f64) + REG
                })
                .collect();
            Shape::Spherical(vars)
        }
    };
    Ok(Params { log_weights, means, shape })
}

/// Returns responsibilities and the mean log-likelihood.
fn e_step(x: &DMatrix<f64>, p: &Params) -> Result<(DMatrix<f64>, f64)> {
    let (n, m) = x.shape();
    let k = p.means.len();
    let mut logp = DMatrix::zeros(n, k);
    let half_log_2pi = 0.5 * m as f64 * (2.0 * PI).ln();
    for c in 0..k {
        match &p.shape {
            Shape::Full(chols) => {
                let l = chols[c].l();
                let log_det: f64 = (0..m).map(|j| l[(j, j)].ln()).sum();
                for i in 0..n {
                    let d = x.row(i).transpose() - &p.means[c];
                    let z = l
                        .solve_lower_triangular(&d)
                        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
                    logp[(i, c)] = p.log_weights[c] - half_log_2pi - log_det - 0.5 * z.norm_squared();
                }
            }
            Shape::Spherical(vars) => {
                let v = vars[c];
                for i in 0..n {
                    let d2 = sq_euclidean(x.row(i).transpose().as_slice(), p.means[c].as_slice());
                    logp[(i, c)] = p.log_weights[c] - half_log_2pi - 0.5 * m as f64 * v.ln() - 0.5 * d2 / v;
                }
            }
        }
    }
    let mut total = 0.0;
    for i in 0..n {
        let mx = (0..k).map(|c| logp[(i, c)]).fold(f64::NEG_INFINITY, f64::max);
        let lse = mx + (0..k).map(|c| (logp[(i, c)] - mx).exp()).sum::<f64>().ln();
        for c in 0..k {
            logp[(i, c)] = (logp[(i, c)] - lse).exp();
        }
        total += lse;
    }
    let ll = total / n as f64;
    if !ll.is_finite() {
        return Err(Error::Numerical("non-finite log-likelihood".into()));
    }
    Ok((logp, ll))
}

fn hard(labels: &[usize], k: usize) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(labels.len(), k);
    for (i, &l) in labels.iter().enumerate() {
        r[(i, l)] = 1.0;
    }
    r
}

fn initial_resp(pts: &Points, k: usize, init: GmmInit, rng: &mut BenchRng) -> Result<DMatrix<f64>> {
    let n = pts.n();
    Ok(match init {
        GmmInit::KMeans => {
            let fit = kmeans_points(pts, &KMeansOptions::euclidean(k, 1), rng)?;
            hard(&fit.labels, k)
        }
        GmmInit::KMeansPlusPlus => {
            let lloyd = Lloyd::new(pts, DistanceMetric::Euclidean)?;
            let seeds = lloyd.init_indices(k, Init::KMeansPlusPlus, rng);
            let labels: Vec<usize> = (0..n)
                .map(|i| {
                    (0..k)
                        .min_by(|&a, &b| {
                            sq_euclidean(pts.row(i), pts.row(seeds[a])).total_cmp(&sq_euclidean(pts.row(i), pts.row(seeds[b])))
                        })
                        .expect("k >= 1")
                })
                .collect();
            hard(&labels, k)
        }
        GmmInit::Random => {
            let mut r = DMatrix::from_fn(n, k, |_, _| rng.random::<f64>());
            for i in 0..n {
                let s: f64 = r.row(i).sum();
                r.row_mut(i).iter_mut().for_each(|v| *v /= s);
            }
            r
        }
    })
}

/// Expectation maximization for a `k`-component Gaussian mixture.
pub(crate) fn gmm(pts: &Points, k: usize, cov: Covariance, init: GmmInit, rng: &mut BenchRng) -> Result<GmmFit> {
    let x = pts.to_matrix();
    let mut resp = initial_resp(pts, k, init, rng)?;
    let mut trace = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..MAX_ITER {
        let params = m_step(&x, &resp, cov)?;
        let (r, ll) = e_step(&x, &params)?;
        resp = r;
        trace.push(ll);
        if (ll - prev).abs() < TOL {
            break;
        }
        prev = ll;
    }
    let labels = (0..pts.n())
        .map(|i| {
            let row = resp.row(i);
            let mut best = 0;
            for c in 1..k {
                if row[c] > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect();
    Ok(GmmFit { labels, trace })
}
