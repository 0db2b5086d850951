use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The ten conventional clustering algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    KMeans,
    KernelKMeans,
    AggClu,
    #[serde(rename = "DBSCAN")]
    Dbscan,
    #[serde(rename = "BIRCH")]
    Birch,
    #[serde(rename = "GMM")]
    Gmm,
    SpeClu,
    MeanShift,
    #[serde(rename = "kPC")]
    Kpc,
    #[serde(rename = "SSC")]
    Ssc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 10] = [
        Algorithm::KMeans,
        Algorithm::KernelKMeans,
        Algorithm::AggClu,
        Algorithm::Dbscan,
        Algorithm::Birch,
        Algorithm::Gmm,
        Algorithm::SpeClu,
        Algorithm::MeanShift,
        Algorithm::Kpc,
        Algorithm::Ssc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::KMeans => "KMeans",
            Algorithm::KernelKMeans => "KernelKMeans",
            Algorithm::AggClu => "AggClu",
            Algorithm::Dbscan => "DBSCAN",
            Algorithm::Birch => "BIRCH",
            Algorithm::Gmm => "GMM",
            Algorithm::SpeClu => "SpeClu",
            Algorithm::MeanShift => "MeanShift",
            Algorithm::Kpc => "kPC",
            Algorithm::Ssc => "SSC",
        }
    }

    /// Whether the algorithm is told the number of clusters.
    pub fn takes_k(self) -> bool {
        !matches!(self, Algorithm::Dbscan | Algorithm::MeanShift)
    }

    /// Position in [`Algorithm::ALL`].
    pub fn index(self) -> usize {
        Algorithm::ALL.iter().position(|&a| a == self).expect("listed")
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_owned()))
    }
}

/// A bound hyperparameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Str(String),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Float(v) => Some(*v),
            ParamValue::Str(_) => None,
        }
    }

    pub fn as_usize(&self) -> Option<usize> {
        match self {
            ParamValue::Int(v) if *v >= 0 => Some(*v as usize),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) if v.fract() == 0.0 && v.abs() < 1e15 => write!(f, "{v:.1}"),
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Str(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ParamKind {
    Int,
    Float,
    Str,
}

pub(crate) fn param_kind(key: &str) -> Option<ParamKind> {
    Some(match key {
        "gamma" | "eps" | "threshold" | "bandwidth" | "lambda" => ParamKind::Float,
        "min_sample" | "branching_factor" | "k" | "min_bin_freq" | "d" | "n_init" | "max_iter" => ParamKind::Int,
        "init" | "metric" | "linkage" | "covariance_type" | "init_params" | "affinity" => ParamKind::Str,
        _ => return None,
    })
}

/// Coerces a raw value to the kind its key expects (JSON `1` for a float key
/// becomes `1.0`, and so on).
pub(crate) fn coerce(key: &str, v: ParamValue) -> Result<ParamValue> {
    let kind = param_kind(key).ok_or_else(|| Error::InvalidConfig(format!("unknown parameter {key:?}")))?;
    let bad = || Error::InvalidConfig(format!("bad value for {key}"));
    Ok(match (kind, v) {
        (ParamKind::Float, ParamValue::Float(f)) => ParamValue::Float(f),
        (ParamKind::Float, ParamValue::Int(i)) => ParamValue::Float(i as f64),
        (ParamKind::Int, ParamValue::Int(i)) => ParamValue::Int(i),
        (ParamKind::Int, ParamValue::Float(f)) if f.fract() == 0.0 && f.abs() < 1e15 => ParamValue::Int(f as i64),
        (ParamKind::Str, ParamValue::Str(s)) => ParamValue::Str(s),
        _ => return Err(bad()),
    })
}

fn parse_value(key: &str, raw: &str) -> Result<ParamValue> {
    let kind = param_kind(key).ok_or_else(|| Error::InvalidConfig(format!("unknown parameter {key:?}")))?;
    let bad = || Error::InvalidConfig(format!("bad value {raw:?} for {key}"));
    Ok(match kind {
        ParamKind::Float => ParamValue::Float(raw.parse().map_err(|_| bad())?),
        ParamKind::Int => ParamValue::Int(raw.parse().map_err(|_| bad())?),
        ParamKind::Str => ParamValue::Str(raw.to_owned()),
    })
}

/// One product block of a search space: ordered `(key, allowed values)` rows.
pub type Block = Vec<(&'static str, Vec<ParamValue>)>;

fn s(v: &str) -> ParamValue {
    ParamValue::Str(v.to_owned())
}

fn fl(vs: &[f64]) -> Vec<ParamValue> {
    vs.iter().map(|&v| ParamValue::Float(v)).collect()
}

fn int(vs: &[i64]) -> Vec<ParamValue> {
    vs.iter().map(|&v| ParamValue::Int(v)).collect()
}

const METRICS: [&str; 3] = ["euclidean", "manhattan", "cosine"];

/// Hyperparameter search space per algorithm, as a union of product blocks.
///
/// Multiplier-style values (`eps`, `gamma`, `threshold`, `bandwidth`) are
/// scaled by data-driven bases at fit time.
pub fn search_space(algorithm: Algorithm) -> Vec<Block> {
    let metrics = || METRICS.iter().map(|m| s(m)).collect::<Vec<_>>();
    let inits = || vec![s("kmeans++"), s("random")];
    match algorithm {
        Algorithm::KMeans => vec![vec![
            ("init", inits()),
            ("metric", metrics()),
            ("n_init", int(&[10])),
            ("max_iter", int(&[500])),
        ]],
        Algorithm::KernelKMeans => vec![vec![
            ("gamma", fl(&[0.01, 0.1, 1.0, 10.0, 100.0])),
            ("init", inits()),
            ("max_iter", int(&[500])),
        ]],
        Algorithm::AggClu => vec![vec![
            ("metric", metrics()),
            ("linkage", vec![s("average"), s("complete"), s("single")]),
        ]],
        Algorithm::Dbscan => vec![vec![
            ("eps", fl(&[0.001, 0.005, 0.01, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0, 10.0])),
            ("min_sample", int(&[3, 5, 10])),
            ("metric", metrics()),
        ]],
        Algorithm::Birch => vec![vec![
            ("threshold", fl(&[0.3, 0.5, 0.7, 0.9])),
            ("branching_factor", int(&[30, 50, 70])),
        ]],
        Algorithm::Gmm => vec![vec![
            ("covariance_type", vec![s("full"), s("spherical")]),
            ("init_params", vec![s("kmeans"), s("kmeans++"), s("random")]),
        ]],
        Algorithm::SpeClu => vec![
            vec![("affinity", vec![s("knn")]), ("k", int(&[3, 5, 10, 20, 30, 50]))],
            vec![("affinity", vec![s("rbf")]), ("gamma", fl(&[0.1, 0.5, 1.0, 5.0, 10.0]))],
        ],
        Algorithm::MeanShift => vec![vec![("bandwidth", fl(&[0.1, 0.3, 0.5, 0.7])), ("min_bin_freq", int(&[1, 3, 5]))]],
        Algorithm::Kpc => vec![vec![("d", int(&[5, 10, 20, 30, 50]))]],
        Algorithm::Ssc => vec![vec![("lambda", fl(&[100.0, 10.0, 1.0, 0.1, 0.01]))]],
    }
}

/// One algorithm with every hyperparameter bound (one grid cell), plus the
/// cluster count for algorithms that take it.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmConfig {
    algorithm: Algorithm,
    params: Vec<(String, ParamValue)>,
    k: Option<usize>,
}

impl AlgorithmConfig {
    /// Builds and validates a config; `params` must follow the key order of
    /// one search-space block and every value must lie in its range.
    pub fn new(algorithm: Algorithm, params: Vec<(String, ParamValue)>) -> Result<Self> {
        let params = params
            .into_iter()
            .map(|(k, v)| coerce(&k, v).map(|v| (k, v)))
            .collect::<Result<Vec<_>>>()?;
        let cfg = AlgorithmConfig {
            algorithm,
            params,
            k: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Convenience for literals: `AlgorithmConfig::from_pairs(KMeans, &[("init", "kmeans++"), ...])`.
    pub fn from_pairs(algorithm: Algorithm, pairs: &[(&str, &str)]) -> Result<Self> {
        let params = pairs
            .iter()
            .map(|(k, v)| parse_value(k, v).map(|pv| ((*k).to_owned(), pv)))
            .collect::<Result<Vec<_>>>()?;
        AlgorithmConfig::new(algorithm, params)
    }

    /// Parses `"<algo>/<key=value;...>"`.
    pub fn parse_id(id: &str) -> Result<Self> {
        let (algo, rest) = id
            .split_once('/')
            .ok_or_else(|| Error::InvalidConfig(format!("config id {id:?} lacks '/'")))?;
        let algorithm: Algorithm = algo.parse()?;
        let mut params = Vec::new();
        if !rest.is_empty() {
            for part in rest.split(';') {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidConfig(format!("malformed pair {part:?}")))?;
                params.push((k.to_owned(), parse_value(k, v)?));
            }
        }
        AlgorithmConfig::new(algorithm, params)
    }

    fn validate(&self) -> Result<()> {
        let keys: Vec<&str> = self.params.iter().map(|(k, _)| k.as_str()).collect();
        for block in search_space(self.algorithm) {
            let bkeys: Vec<&str> = block.iter().map(|(k, _)| *k).collect();
            if bkeys != keys {
                continue;
            }
            for ((key, value), (_, allowed)) in self.params.iter().zip(&block) {
                if !allowed.contains(value) {
                    return Err(Error::InvalidConfig(format!(
                        "{}: {key}={value} outside the search range",
                        self.algorithm
                    )));
                }
            }
            return Ok(());
        }
        Err(Error::InvalidConfig(format!(
            "{}: parameter set {keys:?} matches no search block",
            self.algorithm
        )))
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn params(&self) -> &[(String, ParamValue)] {
        &self.params
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    /// Binds the cluster count; ignored for algorithms that do not take K.
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = self.algorithm.takes_k().then_some(k);
        self
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub(crate) fn f64_param(&self, key: &str) -> Result<f64> {
        self.get(key)
            .and_then(ParamValue::as_f64)
            .ok_or_else(|| Error::InvalidConfig(format!("{} needs {key}", self.algorithm)))
    }

    pub(crate) fn usize_param(&self, key: &str) -> Result<usize> {
        self.get(key)
            .and_then(ParamValue::as_usize)
            .ok_or_else(|| Error::InvalidConfig(format!("{} needs {key}", self.algorithm)))
    }

    pub(crate) fn str_param(&self, key: &str) -> Result<&str> {
        self.get(key)
            .and_then(ParamValue::as_str)
            .ok_or_else(|| Error::InvalidConfig(format!("{} needs {key}", self.algorithm)))
    }

    /// `"<algo>/<key=value;...>"`, keys in search-space order. K is not part
    /// of the id.
    pub fn config_id(&self) -> String {
        let body: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}/{}", self.algorithm, body.join(";"))
    }
}

impl fmt::Display for AlgorithmConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.config_id())
    }
}
