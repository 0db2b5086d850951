use std::time::Instant;

use rayon::prelude::*;

use super::grid::Grid;
use crate::cluster::{fit_predict, AlgorithmConfig};
use crate::data::Dataset;
use crate::metrics::{ari, clustering_accuracy, nmi, Metric};
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Outcome of one (dataset, config, repeat) cell. `None` marks MISSING.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub dataset: String,
    pub config_id: String,
    pub repeat: u32,
    pub seed: u64,
    pub labels: Option<Vec<usize>>,
    pub acc: Option<f64>,
    pub nmi: Option<f64>,
    pub ari: Option<f64>,
    /// Wall time of `fit_predict` alone.
    pub time_s: Option<f64>,
    pub error: Option<String>,
}

impl RunResult {
    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Acc => self.acc,
            Metric::Nmi => self.nmi,
            Metric::Ari => self.ari,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepOptions {
    pub repeats: u32,
    pub base_seed: u64,
    pub workers: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            repeats: 5,
            base_seed: 0,
            workers: 1,
        }
    }
}

/// Seed of one cell: a stable hash of the base seed and the cell coordinates.
pub fn cell_seed(base_seed: u64, dataset: &str, config_id: &str, repeat: u32) -> u64 {
    derive_seed(base_seed, &[dataset, config_id, &repeat.to_string()])
}

pub fn run_cell(dataset: &Dataset, cfg: &AlgorithmConfig, repeat: u32, base_seed: u64) -> RunResult {
    let cfg = cfg.clone().with_k(dataset.k());
    let config_id = cfg.config_id();
    let seed = cell_seed(base_seed, dataset.name(), &config_id, repeat);
    let start = Instant::now();
    let fitted = fit_predict(&cfg, dataset.x(), seed);
    let time_s = start.elapsed().as_secs_f64();
    let mut out = RunResult {
        dataset: dataset.name().to_owned(),
        config_id,
        repeat,
        seed,
        labels: None,
        acc: None,
        nmi: None,
        ari: None,
        time_s: Some(time_s),
        error: None,
    };
    match fitted {
        Ok(labels) => {
            if let Some(y) = dataset.labels() {
                out.acc = clustering_accuracy(y, &labels).ok();
                out.nmi = nmi(y, &labels).ok();
                out.ari = ari(y, &labels).ok();
            }
            out.labels = Some(labels);
        }
        Err(e) => {
            log::debug!("{} {} repeat {}: {e}", out.dataset, out.config_id, repeat);
            out.error = Some(e.to_string());
        }
    }
    out
}

/// Runs every (dataset, config, repeat) cell on a pool of `workers` threads.
///
/// Output order is canonical (datasets as given, then grid order, then
/// repeat) and does not depend on the worker count. Cell failures are
/// recorded, never propagated.
pub fn run_sweep(datasets: &[Dataset], grids: &[Grid], opts: &SweepOptions) -> Result<Vec<RunResult>> {
    if opts.repeats == 0 {
        return Err(Error::invalid("repeats must be >= 1"));
    }
    let mut names: Vec<&str> = datasets.iter().map(Dataset::name).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("dataset names must be unique"));
    }
    let mut cells = Vec::new();
    for d in datasets {
        for g in grids {
            for cfg in g.configs() {
                for r in 0..opts.repeats {
                    cells.push((d, cfg, r));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(|(d, cfg, r)| run_cell(d, cfg, *r, opts.base_seed)).collect()))
}
