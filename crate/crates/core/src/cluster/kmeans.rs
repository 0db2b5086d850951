use rand::seq::index;
use rand::Rng;

use super::distance::DistanceMetric;
use crate::points::{dot, manhattan, norm, sq_euclidean, Points};
use crate::rng::BenchRng;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    KMeansPlusPlus,
    Random,
}

impl std::str::FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans++" => Ok(Init::KMeansPlusPlus),
            "random" => Ok(Init::Random),
            other => Err(Error::InvalidConfig(format!("unknown init {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KMeansOptions {
    pub k: usize,
    pub metric: DistanceMetric,
    pub init: Init,
    pub n_init: usize,
    pub max_iter: usize,
}

impl KMeansOptions {
    pub fn euclidean(k: usize, n_init: usize) -> Self {
        KMeansOptions {
            k,
            metric: DistanceMetric::Euclidean,
            init: Init::KMeansPlusPlus,
            n_init,
            max_iter: 500,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    /// Sum over samples of the assignment cost to the own center.
    pub objective: f64,
    /// Objective after every assignment step, in order.
    #[cfg_attr(not(test), allow(dead_code))]
    pub trace: Vec<f64>,
}

/// Lloyd-style clustering under one of three geometries.
///
/// Euclidean minimizes squared distances to means, Manhattan minimizes L1
/// distances to coordinate-wise medians, and cosine minimizes `1 - cos` to
/// normalized means.
pub(crate) struct Lloyd<'a> {
    pts: &'a Points,
    metric: DistanceMetric,
}

impl<'a> Lloyd<'a> {
    pub fn new(pts: &'a Points, metric: DistanceMetric) -> Result<Self> {
        if metric == DistanceMetric::Cosine && (0..pts.n()).any(|i| norm(pts.row(i)) == 0.0) {
            return Err(Error::DegenerateGeometry("zero vector under cosine distance".into()));
        }
        Ok(Lloyd { pts, metric })
    }

    #[inline]
    fn cost(&self, x: &[f64], c: &[f64]) -> f64 {
        match self.metric {
            DistanceMetric::Euclidean => sq_euclidean(x, c),
            DistanceMetric::Manhattan => manhattan(x, c),
            DistanceMetric::Cosine => {
                let d = 1.0 - dot(x, c) / (norm(x) * norm(c));
                d.max(0.0)
            }
        }
    }

    /// Distance used for D^2 seeding.
    fn seed_dist(&self, x: &[f64], c: &[f64]) -> f64 {
        match self.metric {
            DistanceMetric::Euclidean => sq_euclidean(x, c),
            _ => self.cost(x, c).powi(2),
        }
    }

    pub fn init_indices(&self, k: usize, init: Init, rng: &mut BenchRng) -> Vec<usize> {
        let n = self.pts.n();
        match init {
            Init::Random => index::sample(rng, n, k).into_vec(),
            Init::KMeansPlusPlus => {
                let mut chosen = vec![rng.random_range(0..n)];
                let mut best: Vec<f64> = (0..n).map(|i| self.seed_dist(self.pts.row(i), self.pts.row(chosen[0]))).collect();
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
                        let d = self.seed_dist(self.pts.row(i), self.pts.row(next));
                        if d < *b {
                            *b = d;
                        }
                    }
                }
                chosen
            }
        }
    }

    fn update_center(&self, members: &[usize], previous: &[f64]) -> Vec<f64> {
        let m = self.pts.m();
        match self.metric {
            DistanceMetric::Manhattan => (0..m)
                .map(|j| {
                    let col: Vec<f64> = members.iter().map(|&i| self.pts.row(i)[j]).collect();
                    crate::stats::median(&col)
                })
                .collect(),
            DistanceMetric::Euclidean | DistanceMetric::Cosine => {
                let mut c = vec![0.0; m];
                for &i in members {
                    let row = self.pts.row(i);
                    if self.metric == DistanceMetric::Cosine {
                        let r = norm(row);
                        c.iter_mut().zip(row).for_each(|(a, b)| *a += b / r);
                    } else {
                        c.iter_mut().zip(row).for_each(|(a, b)| *a += b);
                    }
                }
                let len = members.len() as f64;
                c.iter_mut().for_each(|v| *v /= len);
                if self.metric == DistanceMetric::Cosine {
                    let r = norm(&c);
                    if r == 0.0 {
                        return previous.to_vec();
                    }
                    c.iter_mut().for_each(|v| *v /= r);
                }
                c
            }
        }
    }

    /// Runs Lloyd iterations from the given seed points.
    pub fn run(&self, init: &[usize], max_iter: usize) -> KMeansFit {
        self.run_from_centers(init.iter().map(|&i| self.pts.row(i).to_vec()).collect(), max_iter)
    }

    /// Runs Lloyd iterations from arbitrary starting centers.
    pub fn run_from_centers(&self, mut centers: Vec<Vec<f64>>, max_iter: usize) -> KMeansFit {
        let n = self.pts.n();
        let k = centers.len();
        let mut labels = vec![usize::MAX; n];
        let mut trace = Vec::new();
        for _ in 0..max_iter.max(1) {
            let mut new_labels = vec![0usize; n];
            let mut own = vec![0.0; n];
            for i in 0..n {
                let x = self.pts.row(i);
                let (mut bc, mut bd) = (0, f64::INFINITY);
                for (c, center) in centers.iter().enumerate() {
                    let d = self.cost(x, center);
                    if d < bd {
                        bd = d;
                        bc = c;
                    }
                }
                new_labels[i] = bc;
                own[i] = bd;
            }
            repair_empty(&mut new_labels, &mut own, k);
            trace.push(own.iter().sum());
            if new_labels == labels {
                break;
            }
            labels = new_labels;
            let mut members = vec![Vec::new(); k];
            for (i, &l) in labels.iter().enumerate() {
                members[l].push(i);
            }
            for c in 0..k {
                if !members[c].is_empty() {
                    centers[c] = self.update_center(&members[c], &centers[c]);
                }
            }
        }
        KMeansFit {
            objective: *trace.last().expect("at least one iteration"),
            labels,
            trace,
        }
    }
}

/// Moves, for every empty cluster, the sample farthest from its own center
/// (among clusters with more than one member) into that cluster.
pub(crate) fn repair_empty(labels: &mut [usize], own: &mut [f64], k: usize) {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let far = (0..labels.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .max_by(|&a, &b| own[a].total_cmp(&own[b]).then(b.cmp(&a)));
        let Some(i) = far else { return };
        sizes[labels[i]] -= 1;
        sizes[c] += 1;
        labels[i] = c;
        own[i] = 0.0;
    }
}

/// Best-of-`n_init` Lloyd clustering.
pub fn kmeans_points(pts: &Points, opts: &KMeansOptions, rng: &mut BenchRng) -> Result<KMeansFit> {
    if opts.k == 0 || opts.k > pts.n() {
        return Err(Error::invalid(format!("k={} out of range for n={}", opts.k, pts.n())));
    }
    let lloyd = Lloyd::new(pts, opts.metric)?;
    let mut best: Option<KMeansFit> = None;
    for _ in 0..opts.n_init.max(1) {
        let init = lloyd.init_indices(opts.k, opts.init, rng);
        let fit = lloyd.run(&init, opts.max_iter);
        if best.as_ref().is_none_or(|b| fit.objective < b.objective) {
            best = Some(fit);
        }
    }
    Ok(best.expect("n_init >= 1"))
}
