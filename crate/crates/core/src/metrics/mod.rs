//! Partition scoring.
//!
//! External metrics compare a prediction to ground truth and are the
//! benchmark's performance scores. Internal metrics need only the data and a
//! labelling; they feed the landmarker meta-features.

mod external;
mod hungarian;
mod internal;

pub use external::{ari, clustering_accuracy, nmi, Contingency};
pub use hungarian::max_weight_assignment;
pub use internal::{internal_metrics, InternalMetrics};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// One of the three external performance metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Acc,
    Nmi,
    Ari,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Acc, Metric::Nmi, Metric::Ari];

    /// Valid value range for observed entries.
    pub fn range(self) -> (f64, f64) {
        match self {
            Metric::Acc | Metric::Nmi => (0.0, 1.0),
            Metric::Ari => (-1.0, 1.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Acc => "acc",
            Metric::Nmi => "nmi",
            Metric::Ari => "ari",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "acc" => Ok(Metric::Acc),
            "nmi" => Ok(Metric::Nmi),
            "ari" => Ok(Metric::Ari),
            other => Err(crate::Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}
