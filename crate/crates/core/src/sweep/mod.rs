//! Hyperparameter grids, sweep execution and default/best summaries.

mod grid;
mod io;
mod run;
mod summary;

use serde::{Deserialize, Serialize};

pub use grid::{all_grids, enumerate_grid, parse_grids_json, Grid};
pub use io::{read_results, read_results_file, write_results, write_summary, write_timings, RESULTS_HEADER};
pub use run::{cell_seed, run_cell, run_sweep, RunResult, SweepOptions};
pub use summary::{algorithm_of, reduce_repeats, summarize, AlgorithmSummary, CellTable, Reducer};

/// Settings a sweep ran with, stored next to its results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub base_seed: u64,
    pub repeats: u32,
    pub reducer: Reducer,
    pub datasets: Vec<String>,
    pub configs: usize,
    /// How relative hyperparameters map to absolute values.
    pub scale_units: ScaleUnits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleUnits {
    pub dbscan_eps: String,
    pub birch_threshold: String,
    pub meanshift_bandwidth: String,
    pub rbf_gamma: String,
    pub scale_sample_cap: usize,
}

impl Default for ScaleUnits {
    fn default() -> Self {
        ScaleUnits {
            dbscan_eps: "multiplier of eps_base under the config metric".into(),
            birch_threshold: "multiplier of euclidean eps_base".into(),
            meanshift_bandwidth: "multiplier of euclidean eps_base".into(),
            rbf_gamma: "multiplier of gamma_base".into(),
            scale_sample_cap: crate::cluster::DEFAULT_SCALE_SAMPLE_CAP,
        }
    }
}
