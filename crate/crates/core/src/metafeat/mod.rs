//! Fixed-order meta-feature vectors: statistical descriptors followed by a
//! KMeans landmarker block.
//!
//! Rows are put in lexicographic order before extraction, so every
//! coordinate is invariant to the order of the input samples.

mod io;
mod landmark;
mod normality;
mod statistical;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::points::Points;
use crate::{Error, Result};

pub use io::{read_manifest_json, read_meta_csv, write_manifest_json, write_meta_csv, MetaTable};
pub use landmark::{landmarker_features, DEFAULT_K_SET, LANDMARK_N_INIT};
pub use normality::normal_test_p;
pub use statistical::statistical_features;

/// One coordinate of a meta-feature vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    /// Formula family the coordinate belongs to.
    pub tag: String,
}

/// Ordered coordinate names of a meta-feature vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub features: Vec<FeatureSpec>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }
}

/// Meta-feature values with their manifest and imputation flags.
///
/// Coordinates whose formula is undefined for the dataset (a zero
/// denominator, an empty entry set, a skipped K) hold 0 and are flagged.
#[derive(Clone, Debug, PartialEq)]
pub struct MetaVector {
    values: Vec<f64>,
    manifest: Manifest,
    imputed: Vec<bool>,
}

impl MetaVector {
    pub fn new(values: Vec<f64>, manifest: Manifest, imputed: Vec<bool>) -> Result<Self> {
        if values.len() != manifest.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: manifest.len(),
            });
        }
        if imputed.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: imputed.len(),
                right: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("meta-feature {} is not finite", manifest.features[i].name)));
        }
        Ok(MetaVector { values, manifest, imputed })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn imputed(&self) -> &[bool] {
        &self.imputed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.manifest.position(name).map(|i| self.values[i])
    }

    pub fn is_imputed(&self, name: &str) -> Option<bool> {
        self.manifest.position(name).map(|i| self.imputed[i])
    }

    /// Names of the imputed coordinates.
    pub fn imputed_names(&self) -> Vec<&str> {
        self.manifest
            .features
            .iter()
            .zip(&self.imputed)
            .filter(|(_, &f)| f)
            .map(|(s, _)| s.name.as_str())
            .collect()
    }

    /// `self` followed by `other`.
    pub fn concat(mut self, other: MetaVector) -> MetaVector {
        self.values.extend(other.values);
        self.manifest.features.extend(other.manifest.features);
        self.imputed.extend(other.imputed);
        self
    }
}

/// Statistical block followed by the landmarker block for the default K set.
pub fn meta_vector(d: &Dataset, seed: u64) -> Result<MetaVector> {
    meta_vector_with(d, &DEFAULT_K_SET, seed)
}

pub fn meta_vector_with(d: &Dataset, k_set: &[usize], seed: u64) -> Result<MetaVector> {
    let pts = canonical_rows(d.x());
    let stat = statistical::statistical_block(&pts, seed)?;
    let lm = landmark::landmark_block(&pts, k_set, seed)?;
    Ok(stat.concat(lm))
}

/// Samples sorted lexicographically.
pub(crate) fn canonical_rows(x: &DMatrix<f64>) -> Points {
    let mut rows: Vec<Vec<f64>> = x.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Points::from_rows(&rows)
}

/// Accumulates coordinates, imputing undefined values.
#[derive(Default)]
pub(crate) struct Builder {
    values: Vec<f64>,
    features: Vec<FeatureSpec>,
    imputed: Vec<bool>,
}

impl Builder {
    pub fn push(&mut self, name: impl Into<String>, tag: &str, value: Option<f64>, flagged: bool) {
        let (v, f) = match value {
            Some(v) if v.is_finite() => (v, flagged),
            _ => (0.0, true),
        };
        self.values.push(v);
        self.features.push(FeatureSpec {
            name: name.into(),
            tag: tag.to_owned(),
        });
        self.imputed.push(f);
    }

    pub fn finish(self) -> Result<MetaVector> {
        MetaVector::new(self.values, Manifest { features: self.features }, self.imputed)
    }
}
