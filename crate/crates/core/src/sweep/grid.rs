use serde::Deserialize;
use serde_json::Value;

use crate::cluster::{coerce_param, search_space, Algorithm, AlgorithmConfig, ParamValue};
use crate::{Error, Result};

/// Ordered hyperparameter configurations of one algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    algorithm: Algorithm,
    configs: Vec<AlgorithmConfig>,
    default_index: usize,
}

impl Grid {
    pub fn new(algorithm: Algorithm, configs: Vec<AlgorithmConfig>, default_index: usize) -> Result<Self> {
        if configs.is_empty() {
            return Err(Error::InvalidConfig(format!("{algorithm}: empty grid")));
        }
        if default_index >= configs.len() {
            return Err(Error::InvalidConfig(format!(
                "{algorithm}: default_index {default_index} out of range for {} configs",
                configs.len()
            )));
        }
        if let Some(c) = configs.iter().find(|c| c.algorithm() != algorithm) {
            return Err(Error::InvalidConfig(format!("{c} listed in the {algorithm} grid")));
        }
        let mut ids: Vec<String> = configs.iter().map(AlgorithmConfig::config_id).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(format!("{algorithm}: duplicate configs in grid")));
        }
        Ok(Grid {
            algorithm,
            configs,
            default_index,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn configs(&self) -> &[AlgorithmConfig] {
        &self.configs
    }

    pub fn default_index(&self) -> usize {
        self.default_index
    }

    pub fn default_config(&self) -> &AlgorithmConfig {
        &self.configs[self.default_index]
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Position of a config id in this grid.
    pub fn position(&self, config_id: &str) -> Option<usize> {
        self.configs.iter().position(|c| c.config_id() == config_id)
    }
}

/// Cartesian product of rows, first row varying slowest.
fn product(rows: &[(String, Vec<ParamValue>)]) -> Vec<Vec<(String, ParamValue)>> {
    let mut out: Vec<Vec<(String, ParamValue)>> = vec![Vec::new()];
    for (key, values) in rows {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push((key.clone(), v.clone()));
                    p
                })
            })
            .collect();
    }
    out
}

fn grid_from_blocks(algorithm: Algorithm, blocks: Vec<Vec<(String, Vec<ParamValue>)>>, default_index: usize) -> Result<Grid> {
    let mut configs = Vec::new();
    for block in blocks {
        for params in product(&block) {
            configs.push(AlgorithmConfig::new(algorithm, params)?);
        }
    }
    Grid::new(algorithm, configs, default_index)
}

/// The full search grid of one algorithm with `default_index = 0`.
pub fn enumerate_grid(algorithm: Algorithm) -> Grid {
    let blocks = search_space(algorithm)
        .into_iter()
        .map(|b| b.into_iter().map(|(k, v)| (k.to_owned(), v)).collect())
        .collect();
    grid_from_blocks(algorithm, blocks, 0).expect("built-in search space is valid")
}

/// Grids of all ten algorithms in roster order.
pub fn all_grids() -> Vec<Grid> {
    Algorithm::ALL.iter().map(|&a| enumerate_grid(a)).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridOverride {
    algorithm: String,
    rows: Value,
    #[serde(default)]
    default_index: usize,
}

/// Reorders one `{param: [values]}` object to the key order of the matching
/// search-space block and coerces its values.
fn canonical_block(algorithm: Algorithm, rows: &serde_json::Map<String, Value>) -> Result<Vec<(String, Vec<ParamValue>)>> {
    let mut keys: Vec<&str> = rows.keys().map(String::as_str).collect();
    keys.sort_unstable();
    let block = search_space(algorithm)
        .into_iter()
        .find(|b| {
            let mut bk: Vec<&str> = b.iter().map(|(k, _)| *k).collect();
            bk.sort_unstable();
            bk == keys
        })
        .ok_or_else(|| Error::InvalidConfig(format!("{algorithm}: parameter set {keys:?} matches no search block")))?;
    block
        .iter()
        .map(|(key, _)| {
            let raw = &rows[*key];
            let list: Vec<Value> = match raw {
                Value::Array(a) => a.clone(),
                other => vec![other.clone()],
            };
            if list.is_empty() {
                return Err(Error::InvalidConfig(format!("{algorithm}: empty value list for {key}")));
            }
            let values = list
                .into_iter()
                .map(|v| {
                    let pv: ParamValue = serde_json::from_value(v)?;
                    coerce_param(key, pv)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(((*key).to_owned(), values))
        })
        .collect()
}

fn grid_from_override(o: GridOverride) -> Result<Grid> {
    let algorithm: Algorithm = o.algorithm.parse()?;
    let objects: Vec<serde_json::Map<String, Value>> = match o.rows {
        Value::Object(m) => vec![m],
        Value::Array(items) => items
            .into_iter()
            .map(|v| match v {
                Value::Object(m) => Ok(m),
                _ => Err(Error::InvalidConfig("rows array must hold objects".into())),
            })
            .collect::<Result<_>>()?,
        _ => return Err(Error::InvalidConfig("rows must be an object or an array of objects".into())),
    };
    let blocks = objects.iter().map(|m| canonical_block(algorithm, m)).collect::<Result<Vec<_>>>()?;
    grid_from_blocks(algorithm, blocks, o.default_index)
}

/// Parses grid overrides: a single `{algorithm, rows, default_index}` object
/// or an array of them. `rows` is `{param: [values]}` or an array of such
/// objects (a union of products). Every value must lie in the algorithm's
/// search range.
pub fn parse_grids_json(text: &str) -> Result<Vec<Grid>> {
    let value: Value = serde_json::from_str(text)?;
    let items = match value {
        Value::Array(items) => items,
        other => vec![other],
    };
    if items.is_empty() {
        return Err(Error::InvalidConfig("no grids given".into()));
    }
    let mut grids = Vec::with_capacity(items.len());
    for item in items {
        let o: GridOverride = serde_json::from_value(item)?;
        let g = grid_from_override(o)?;
        if grids.iter().any(|x: &Grid| x.algorithm == g.algorithm) {
            return Err(Error::InvalidConfig(format!("{} appears twice", g.algorithm)));
        }
        grids.push(g);
    }
    Ok(grids)
}
