use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::forest::{Forest, ForestOptions};
use crate::cluster::Algorithm;
use crate::metafeat::{Manifest, MetaVector};
use crate::metrics::Metric;
use crate::perfmatrix::PerformanceMatrix;
use crate::{Error, Result};

const FORMAT: &str = "clubench-selector/1";

/// Forest mapping meta-features to one metric's performance vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorModel {
    format: String,
    metric: Metric,
    /// One tree predicts every target column at once.
    multi_output: bool,
    seed: u64,
    options: ForestOptions,
    feature_manifest: Manifest,
    target_manifest: Vec<String>,
    forest: Forest,
}

impl SelectorModel {
    /// Fits on meta-feature rows `z` aligned with the rows of `targets`.
    pub fn fit(
        z: &DMatrix<f64>,
        feature_manifest: Manifest,
        targets: &PerformanceMatrix,
        options: ForestOptions,
        seed: u64,
    ) -> Result<Self> {
        if z.ncols() != feature_manifest.len() {
            return Err(Error::ManifestMismatch(format!(
                "{} meta-feature columns but the manifest lists {}",
                z.ncols(),
                feature_manifest.len()
            )));
        }
        let forest = Forest::fit(z, targets.values(), targets.mask(), &options, seed)?;
        Ok(SelectorModel {
            format: FORMAT.to_owned(),
            metric: targets.metric(),
            multi_output: true,
            seed,
            options,
            feature_manifest,
            target_manifest: targets.col_names().to_vec(),
            forest,
        })
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn feature_manifest(&self) -> &Manifest {
        &self.feature_manifest
    }

    pub fn target_manifest(&self) -> &[String] {
        &self.target_manifest
    }

    /// Predicted performance vector for a meta-feature vector whose manifest
    /// must equal the training manifest.
    pub fn predict(&self, z: &MetaVector) -> Result<Vec<f64>> {
        if z.manifest() != &self.feature_manifest {
            return Err(Error::ManifestMismatch("meta-feature manifest differs from the model's".into()));
        }
        Ok(self.forest.predict(z.values()))
    }

    /// Prediction from raw values already aligned with the manifest.
    pub fn predict_values(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.feature_manifest.len() {
            return Err(Error::ManifestMismatch(format!(
                "{} meta-features given, the model expects {}",
                z.len(),
                self.feature_manifest.len()
            )));
        }
        Ok(self.forest.predict(z))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Parses and structurally validates a serialized model.
    pub fn from_json(text: &str) -> Result<Self> {
        let m: SelectorModel = serde_json::from_str(text)?;
        if m.format != FORMAT {
            return Err(Error::invalid(format!("unsupported selector format {:?}", m.format)));
        }
        if m.forest.trees.is_empty() {
            return Err(Error::invalid("selector has no trees"));
        }
        if m.target_manifest.is_empty() {
            return Err(Error::invalid("selector has no target columns"));
        }
        for tree in &m.forest.trees {
            tree.validate(m.feature_manifest.len(), m.target_manifest.len())?;
        }
        Ok(m)
    }
}

/// Column chosen for one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub column: usize,
    pub config_id: String,
    pub predicted: Vec<f64>,
}

/// Argmax of the predicted vector; ties go to the lowest column.
pub fn predict_and_select(model: &SelectorModel, z: &MetaVector) -> Result<Choice> {
    let predicted = model.predict(z)?;
    let column = argmax_first(&predicted).ok_or_else(|| Error::invalid("empty prediction"))?;
    Ok(Choice {
        column,
        config_id: model.target_manifest[column].clone(),
        predicted,
    })
}

/// Index of the first maximum.
pub fn argmax_first(xs: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in xs.iter().enumerate() {
        if best.is_none_or(|b| v > xs[b]) {
            best = Some(i);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    Regressor,
    HistoricalBest(Algorithm),
    Eub,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Regressor => f.write_str("regressor"),
            Strategy::HistoricalBest(a) => write!(f, "historical_best:{a}"),
            Strategy::Eub => f.write_str("EUB"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regressor" => Ok(Strategy::Regressor),
            "EUB" | "eub" => Ok(Strategy::Eub),
            _ => match s.strip_prefix("historical_best:") {
                Some(a) => Ok(Strategy::HistoricalBest(a.parse()?)),
                None => Err(Error::invalid(format!("unknown strategy {s:?}"))),
            },
        }
    }
}

impl Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A configuration picked for one held-out dataset and its true score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub dataset: String,
    pub strategy: Strategy,
    pub metric: Metric,
    pub config_id: String,
    /// Read from the held-out matrix; an unobserved cell scores the row's
    /// observed minimum.
    pub realized: f64,
}

pub(crate) fn realize(pm: &PerformanceMatrix, row: usize, col: usize) -> Result<f64> {
    if let Some(v) = pm.get(row, col) {
        return Ok(v);
    }
    (0..pm.shape().1)
        .filter_map(|j| pm.get(row, j))
        .reduce(f64::min)
        .ok_or_else(|| Error::invalid(format!("dataset {} has no observed cells", pm.row_names()[row])))
}
