use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::{enumerate_grid, Grid};
use super::run::RunResult;
use crate::cluster::Algorithm;
use crate::metrics::Metric;
use crate::{Error, Result};

/// How the repeats of one cell collapse to a single value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reducer {
    #[default]
    Mean,
    Median,
}

impl Reducer {
    pub fn reduce(self, xs: &[f64]) -> Option<f64> {
        if xs.is_empty() {
            return None;
        }
        Some(match self {
            Reducer::Mean => crate::stats::mean(xs),
            Reducer::Median => crate::stats::median(xs),
        })
    }
}

impl FromStr for Reducer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Reducer::Mean),
            "median" => Ok(Reducer::Median),
            other => Err(Error::invalid(format!("unknown reducer {other:?}"))),
        }
    }
}

/// Algorithm id of a config id (`"KMeans/..."` -> KMeans).
pub fn algorithm_of(config_id: &str) -> Result<Algorithm> {
    config_id
        .split_once('/')
        .map(|(a, _)| a)
        .ok_or_else(|| Error::InvalidConfig(format!("config id {config_id:?} lacks '/'")))?
        .parse()
}

/// Per-(dataset, config) values after reducing repeats; `None` when every
/// repeat is missing.
pub type CellTable = BTreeMap<(String, String), [Option<f64>; 3]>;

pub fn reduce_repeats(results: &[RunResult], reducer: Reducer) -> CellTable {
    let mut raw: BTreeMap<(String, String), [Vec<f64>; 3]> = BTreeMap::new();
    for r in results {
        let e = raw.entry((r.dataset.clone(), r.config_id.clone())).or_default();
        for (slot, metric) in e.iter_mut().zip(Metric::ALL) {
            if let Some(v) = r.metric(metric) {
                slot.push(v);
            }
        }
    }
    raw.into_iter()
        .map(|(key, vals)| {
            // sort first so the reduction does not depend on input order
            let reduced = vals.map(|mut v| {
                v.sort_by(f64::total_cmp);
                reducer.reduce(&v)
            });
            (key, reduced)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub default_config: String,
    /// Mean over datasets of the default config, in ACC, NMI, ARI order.
    pub default: [f64; 3],
    /// Mean over datasets of the per-dataset best config, per metric.
    pub best: [f64; 3],
    pub delta: [f64; 3],
    /// Datasets entering each metric's mean.
    pub datasets: [usize; 3],
}

/// Default-vs-best aggregation per algorithm.
///
/// Repeats are reduced first. Per metric, both the default and the best
/// mean run over the datasets where the default config is observed, so the
/// best is never below the default. Algorithms without any such dataset are
/// omitted with a warning. Grids supply each algorithm's default; an
/// algorithm without a grid uses its built-in grid.
pub fn summarize(results: &[RunResult], grids: &[Grid], reducer: Reducer) -> Result<Vec<AlgorithmSummary>> {
    if results.is_empty() {
        return Err(Error::invalid("no results to summarize"));
    }
    let cells = reduce_repeats(results, reducer);
    let mut by_algo: BTreeMap<Algorithm, BTreeMap<&str, Vec<(&str, [Option<f64>; 3])>>> = BTreeMap::new();
    for ((dataset, config), vals) in &cells {
        by_algo
            .entry(algorithm_of(config)?)
            .or_default()
            .entry(dataset.as_str())
            .or_default()
            .push((config.as_str(), *vals));
    }
    let mut out = Vec::new();
    for (algorithm, per_dataset) in by_algo {
        let default_config = match grids.iter().find(|g| g.algorithm() == algorithm) {
            Some(g) => g.default_config().config_id(),
            None => enumerate_grid(algorithm).default_config().config_id(),
        };
        let mut default = [0.0; 3];
        let mut best = [0.0; 3];
        let mut counts = [0usize; 3];
        for cells in per_dataset.values() {
            let Some((_, dvals)) = cells.iter().find(|(c, _)| *c == default_config) else {
                continue;
            };
            for m in 0..3 {
                let Some(dv) = dvals[m] else { continue };
                let bv = cells.iter().filter_map(|(_, v)| v[m]).fold(f64::NEG_INFINITY, f64::max);
                default[m] += dv;
                best[m] += bv;
                counts[m] += 1;
            }
        }
        if counts.iter().all(|&c| c == 0) {
            log::warn!("{algorithm}: no observed default cell, omitted from the summary");
            continue;
        }
        for m in 0..3 {
            if counts[m] == 0 {
                default[m] = f64::NAN;
                best[m] = f64::NAN;
            } else {
                default[m] /= counts[m] as f64;
                best[m] /= counts[m] as f64;
            }
        }
        out.push(AlgorithmSummary {
            algorithm,
            default_config,
            default,
            best,
            delta: [best[0] - default[0], best[1] - default[1], best[2] - default[2]],
            datasets: counts,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rr(dataset: &str, config: &str, repeat: u32, acc: Option<f64>) -> RunResult {
        RunResult {
            dataset: dataset.into(),
            config_id: config.into(),
            repeat,
            seed: 0,
            labels: None,
            acc,
            nmi: acc,
            ari: acc,
            time_s: None,
            error: None,
        }
    }

    const C0: &str = "SSC/lambda=100.0";
    const C1: &str = "SSC/lambda=10.0";

    #[test]
    fn hand_aggregation() {
        let results = vec![
            rr("A", C0, 0, Some(0.5)),
            rr("A", C1, 0, Some(0.9)),
            rr("B", C0, 0, Some(0.8)),
            rr("B", C1, 0, Some(0.6)),
        ];
        let s = summarize(&results, &[], Reducer::Mean).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].best[0] - 0.85).abs() < 1e-12);
        assert!((s[0].default[0] - 0.65).abs() < 1e-12);
        assert!((s[0].delta[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn singleton_grid_best_equals_default() {
        let s = summarize(&[rr("A", C0, 0, Some(0.3)), rr("A", C0, 1, Some(0.5))], &[], Reducer::Mean).unwrap();
        assert_eq!(s[0].best, s[0].default);
        assert!((s[0].best[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn all_missing_algorithm_omitted() {
        let results = vec![
            rr("A", C0, 0, None),
            rr("A", "KMeans/init=kmeans++;metric=euclidean;n_init=10;max_iter=500", 0, Some(0.7)),
        ];
        let s = summarize(&results, &[], Reducer::Median).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].algorithm, Algorithm::KMeans);
    }

    #[test]
    fn reducers() {
        assert_eq!(Reducer::Median.reduce(&[1.0, 2.0, 10.0]), Some(2.0));
        assert_eq!(Reducer::Mean.reduce(&[1.0, 2.0, 3.0]), Some(2.0));
        assert_eq!(Reducer::Mean.reduce(&[]), None);
    }
}
