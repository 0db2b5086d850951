//! Conventional clustering algorithms behind [`fit_predict`].
//!
//! Multiplier-style hyperparameters are relative: DBSCAN `eps`, BIRCH
//! `threshold` and MeanShift `bandwidth` multiply the mean pairwise distance
//! (`eps_base`), and RBF `gamma` values multiply `gamma_base`.

mod agglomerative;
mod birch;
mod config;
mod dbscan;
mod distance;
mod gmm;
mod kernel_kmeans;
mod kmeans;
mod kpc;
mod meanshift;
mod spectral;
mod ssc;

use nalgebra::DMatrix;

pub use config::{search_space, Algorithm, AlgorithmConfig, Block, ParamValue};
pub use distance::{pairwise_distance, scale_bases, DistanceMetric, ScaleBases, DEFAULT_SCALE_SAMPLE_CAP};
pub use spectral::{knn_affinity_matrix, rbf_affinity_matrix};
pub use ssc::ssc_coefficients;

pub(crate) use config::coerce as coerce_param;
pub(crate) use kmeans::{kmeans_points, KMeansOptions, Lloyd};

use crate::points::{compact_labels, Points};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Seed for the scale-base subsample, fixed so bases do not vary by repeat.
const SCALE_SEED: u64 = 0;

fn eps_base(pts: &Points, metric: DistanceMetric) -> Result<f64> {
    distance::eps_base_of(pts, metric, DEFAULT_SCALE_SAMPLE_CAP, SCALE_SEED)
}

fn gamma_base(pts: &Points) -> Result<f64> {
    distance::gamma_base_of(pts, DEFAULT_SCALE_SAMPLE_CAP, SCALE_SEED)
}

/// Clusters the rows of `x` and returns labels `0..C`.
///
/// Deterministic in `(cfg, x, seed)`. Numerical or geometric failures come
/// back as errors so a sweep can record the cell as missing.
pub fn fit_predict(cfg: &AlgorithmConfig, x: &DMatrix<f64>, seed: u64) -> Result<Vec<usize>> {
    let n = x.nrows();
    if n < 2 || x.ncols() == 0 {
        return Err(Error::invalid("need at least two samples and one feature"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite feature value"));
    }
    let algorithm = cfg.algorithm();
    let k = if algorithm.takes_k() {
        let k = cfg.k().ok_or_else(|| Error::InvalidConfig(format!("{algorithm} needs K")))?;
        if k == 0 || k > n {
            return Err(Error::InvalidConfig(format!("K={k} out of range for n={n}")));
        }
        k
    } else {
        0
    };
    let pts = Points::from_matrix(x);
    let mut rng = rng_from_seed(seed);
    let labels = match algorithm {
        Algorithm::KMeans => {
            let opts = KMeansOptions {
                k,
                metric: cfg.str_param("metric")?.parse()?,
                init: cfg.str_param("init")?.parse()?,
                n_init: cfg.usize_param("n_init")?,
                max_iter: cfg.usize_param("max_iter")?,
            };
            kmeans_points(&pts, &opts, &mut rng)?.labels
        }
        Algorithm::KernelKMeans => {
            let gamma = cfg.f64_param("gamma")? * gamma_base(&pts)?;
            let km = kernel_kmeans::kernel_matrix(&pts, kernel_kmeans::Kernel::Rbf { gamma });
            let init = cfg.str_param("init")?.parse()?;
            kernel_kmeans::kernel_kmeans(&km, k, init, 10, cfg.usize_param("max_iter")?, &mut rng).labels
        }
        Algorithm::AggClu => {
            let metric: DistanceMetric = cfg.str_param("metric")?.parse()?;
            let linkage = cfg.str_param("linkage")?.parse()?;
            let dist = distance::Distance::new(&pts, metric)?;
            let cond = agglomerative::Condensed::from_fn(n, |i, j| dist.between(i, j));
            let merges = agglomerative::agglomerate(cond, &vec![1.0; n], linkage);
            agglomerative::cut(n, &merges, k)
        }
        Algorithm::Dbscan => {
            let metric: DistanceMetric = cfg.str_param("metric")?.parse()?;
            let eps = cfg.f64_param("eps")? * eps_base(&pts, metric)?;
            let dist = distance::Distance::new(&pts, metric)?;
            dbscan::dbscan(&dist, n, eps, cfg.usize_param("min_sample")?)
        }
        Algorithm::Birch => {
            let threshold = cfg.f64_param("threshold")? * eps_base(&pts, DistanceMetric::Euclidean)?;
            birch::birch(&pts, threshold, cfg.usize_param("branching_factor")?, k)
        }
        Algorithm::Gmm => {
            let cov = match cfg.str_param("covariance_type")? {
                "full" => gmm::Covariance::Full,
                _ => gmm::Covariance::Spherical,
            };
            let init = match cfg.str_param("init_params")? {
                "kmeans" => gmm::GmmInit::KMeans,
                "kmeans++" => gmm::GmmInit::KMeansPlusPlus,
                _ => gmm::GmmInit::Random,
            };
            gmm::gmm(&pts, k, cov, init, &mut rng)?.labels
        }
        Algorithm::SpeClu => {
            let affinity = match cfg.str_param("affinity")? {
                "knn" => spectral::knn_affinity(&pts, cfg.usize_param("k")?),
                _ => spectral::rbf_affinity(&pts, cfg.f64_param("gamma")? * gamma_base(&pts)?),
            };
            spectral::spectral_labels(&affinity, k, &mut rng)?
        }
        Algorithm::MeanShift => {
            let bandwidth = cfg.f64_param("bandwidth")? * eps_base(&pts, DistanceMetric::Euclidean)?;
            meanshift::mean_shift(&pts, bandwidth, cfg.usize_param("min_bin_freq")?)?
        }
        Algorithm::Kpc => kpc::kpc(&pts, k, cfg.usize_param("d")?, &mut rng)?.labels,
        Algorithm::Ssc => ssc::ssc(x, cfg.f64_param("lambda")?, k, &mut rng)?,
    };
    Ok(compact_labels(&labels))
}
