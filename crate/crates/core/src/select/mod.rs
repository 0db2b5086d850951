//! Meta-learned configuration selection: a multi-output regression forest
//! from meta-features to performance vectors, argmax selection, baselines
//! and the cross-validation protocol.

mod cv;
mod forest;
mod model;

pub use cv::{baselines, cross_validate, fold_assignment, write_cv_report, CvOptions, CvReport};
pub use forest::{Forest, ForestOptions, Node, Tree, MIN_TRAINING_ROWS};
pub use model::{argmax_first, predict_and_select, Choice, SelectionOutcome, SelectorModel, Strategy};
