use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::points::{dot, manhattan, norm, sq_euclidean, Points};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetric {
    Euclidean,
    Manhattan,
    Cosine,
}

impl FromStr for DistanceMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(DistanceMetric::Euclidean),
            "manhattan" => Ok(DistanceMetric::Manhattan),
            "cosine" => Ok(DistanceMetric::Cosine),
            other => Err(Error::InvalidConfig(format!("unknown metric {other:?}"))),
        }
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceMetric::Euclidean => "euclidean",
            DistanceMetric::Manhattan => "manhattan",
            DistanceMetric::Cosine => "cosine",
        })
    }
}

/// Distance evaluator over a fixed point set; caches row norms for cosine.
pub(crate) struct Distance<'a> {
    pts: &'a Points,
    metric: DistanceMetric,
    norms: Vec<f64>,
}

impl<'a> Distance<'a> {
    pub fn new(pts: &'a Points, metric: DistanceMetric) -> Result<Self> {
        let norms = if metric == DistanceMetric::Cosine {
            let norms: Vec<f64> = (0..pts.n()).map(|i| norm(pts.row(i))).collect();
            if norms.contains(&0.0) {
                return Err(Error::DegenerateGeometry("zero vector under cosine distance".into()));
            }
            norms
        } else {
            Vec::new()
        };
        Ok(Distance { pts, metric, norms })
    }

    #[inline]
    pub fn between(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.pts.row(i), self.pts.row(j));
        match self.metric {
            DistanceMetric::Euclidean => sq_euclidean(a, b).sqrt(),
            DistanceMetric::Manhattan => manhattan(a, b),
            DistanceMetric::Cosine => {
                if i == j {
                    return 0.0;
                }
                (1.0 - dot(a, b) / (self.norms[i] * self.norms[j])).clamp(0.0, 2.0)
            }
        }
    }
}

/// Full symmetric distance matrix with zero diagonal.
pub fn pairwise_distance(x: &DMatrix<f64>, metric: DistanceMetric) -> Result<DMatrix<f64>> {
    let pts = Points::from_matrix(x);
    let dist = Distance::new(&pts, metric)?;
    let n = pts.n();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist.between(i, j);
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    Ok(out)
}

/// Data-driven scale factors for multiplier-style hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleBases {
    /// Mean pairwise distance under the config's metric.
    pub eps_base: f64,
    /// `1 / (2 * median squared Euclidean pairwise distance)`.
    pub gamma_base: f64,
}

pub const DEFAULT_SCALE_SAMPLE_CAP: usize = 2000;

fn scale_subset(pts: &Points, sample_cap: usize, seed: u64) -> Points {
    if pts.n() <= sample_cap {
        return pts.clone();
    }
    let mut rng = rng_from_seed(seed);
    let mut idx = index::sample(&mut rng, pts.n(), sample_cap).into_vec();
    idx.sort_unstable();
    pts.select(&idx)
}

pub(crate) fn eps_base_of(pts: &Points, metric: DistanceMetric, sample_cap: usize, seed: u64) -> Result<f64> {
    if pts.n() < 2 {
        return Err(Error::invalid("scale bases need n >= 2"));
    }
    let sub = scale_subset(pts, sample_cap, seed);
    let dist = Distance::new(&sub, metric)?;
    let n = sub.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += dist.between(i, j);
        }
    }
    // each unordered pair stands for two ordered pairs
    let base = 2.0 * total / (n * (n - 1)) as f64;
    if !(base > 0.0) {
        return Err(Error::DegenerateGeometry("all rows identical (eps_base = 0)".into()));
    }
    Ok(base)
}

pub(crate) fn gamma_base_of(pts: &Points, sample_cap: usize, seed: u64) -> Result<f64> {
    if pts.n() < 2 {
        return Err(Error::invalid("scale bases need n >= 2"));
    }
    let sub = scale_subset(pts, sample_cap, seed);
    let n = sub.n();
    let mut sq = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            sq.push(sq_euclidean(sub.row(i), sub.row(j)));
        }
    }
    // ordered pairs duplicate every value, which leaves the median unchanged
    let med = crate::stats::median(&sq);
    if !(med > 0.0) {
        return Err(Error::DegenerateGeometry("median squared distance is zero".into()));
    }
    Ok(1.0 / (2.0 * med))
}

/// Computes `eps_base` and `gamma_base`, exactly when `n <= sample_cap`
/// and on a seeded uniform subsample otherwise.
pub fn scale_bases(x: &DMatrix<f64>, metric: DistanceMetric, sample_cap: usize, seed: u64) -> Result<ScaleBases> {
    let pts = Points::from_matrix(x);
    Ok(ScaleBases {
        eps_base: eps_base_of(&pts, metric, sample_cap, seed)?,
        gamma_base: gamma_base_of(&pts, sample_cap, seed)?,
    })
}
