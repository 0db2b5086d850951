//! Performance matrices, spectral analysis, low-rank completion and rank
//! statistics.

mod completion;
mod matrix;
mod ranks;

pub use completion::{
    ccr, ccr_curve, clamp_to_metric, complete, completion_experiment, mape, mcar_mask, singular_values, CompletionOptions,
    CompletionReport, Factorization, MAPE_FLOOR,
};
pub use matrix::{build_matrix, build_matrix_with, read_matrix, write_matrix, Mask, PerformanceMatrix};
pub use ranks::{best_by_algorithm, performance_vectors, ranks_and_tests, RankTests};
