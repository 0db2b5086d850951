//! Clustering benchmark engine.
//!
//! The crate is organised the way a benchmark run flows:
//!
//! * [`data`] loads and preprocesses tabular datasets and computes their
//!   imbalance statistics and grouping tags.
//! * [`cluster`] holds ten conventional clustering algorithms behind a
//!   single [`cluster::fit_predict`] entry point.
//! * [`metrics`] scores partitions (ACC, NMI, ARI) and computes internal
//!   validity indices.
//! * [`sweep`] enumerates hyperparameter grids, runs every
//!   (dataset, config, repeat) cell and aggregates default/best summaries.
//! * [`perfmatrix`] turns run results into dataset-by-config performance
//!   matrices, analyses their spectrum, completes missing entries and
//!   computes rank statistics.
//! * [`metafeat`] extracts fixed-order meta-feature vectors.
//! * [`select`] learns a meta-feature to performance regressor and
//!   evaluates config selection against baselines.

pub mod cluster;
pub mod data;
mod error;
pub mod metafeat;
pub mod metrics;
pub mod perfmatrix;
pub mod rng;
pub mod select;
pub mod sweep;

pub(crate) mod points;
pub(crate) mod stats;

pub use error::{Error, Result};
