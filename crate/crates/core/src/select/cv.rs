use std::collections::BTreeSet;
use std::io::Write;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::forest::ForestOptions;
use super::model::{argmax_first, realize, SelectionOutcome, SelectorModel, Strategy};
use crate::cluster::Algorithm;
use crate::metafeat::{Manifest, MetaTable};
use crate::metrics::Metric;
use crate::perfmatrix::{Mask, PerformanceMatrix};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sweep::algorithm_of;
use crate::{Error, Result};

/// Outcomes of a baseline strategy on the test rows.
///
/// `HistoricalBest(a)` picks, among the columns of algorithm `a`, the one
/// with the highest mean over observed training cells and applies it to
/// every test row. `Eub` takes each test row's observed maximum.
pub fn baselines(pm: &PerformanceMatrix, train_rows: &[usize], test_rows: &[usize], strategy: Strategy) -> Result<Vec<SelectionOutcome>> {
    let outcome = |row: usize, col: usize, realized: f64| SelectionOutcome {
        dataset: pm.row_names()[row].clone(),
        strategy,
        metric: pm.metric(),
        config_id: pm.col_names()[col].clone(),
        realized,
    };
    match strategy {
        Strategy::Regressor => Err(Error::invalid("the regressor is not a baseline")),
        Strategy::HistoricalBest(algo) => {
            let col = historical_best_column(pm, train_rows, algo)?;
            test_rows.iter().map(|&i| Ok(outcome(i, col, realize(pm, i, col)?))).collect()
        }
        Strategy::Eub => test_rows
            .iter()
            .map(|&i| {
                let row: Vec<f64> = (0..pm.shape().1).map(|j| pm.get(i, j).unwrap_or(f64::NEG_INFINITY)).collect();
                let col = argmax_first(&row).filter(|&j| row[j].is_finite());
                let col = col.ok_or_else(|| Error::invalid(format!("dataset {} has no observed cells", pm.row_names()[i])))?;
                Ok(outcome(i, col, row[col]))
            })
            .collect(),
    }
}

fn historical_best_column(pm: &PerformanceMatrix, train_rows: &[usize], algo: Algorithm) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, c) in pm.col_names().iter().enumerate() {
        if algorithm_of(c)? != algo {
            continue;
        }
        let vals: Vec<f64> = train_rows.iter().filter_map(|&i| pm.get(i, j)).collect();
        if vals.is_empty() {
            continue;
        }
        let mean = crate::stats::mean(&vals);
        if best.is_none_or(|(_, b)| mean > b) {
            best = Some((j, mean));
        }
    }
    best.map(|(j, _)| j)
        .ok_or_else(|| Error::invalid(format!("{algo} has no observed training cells")))
}

/// Fold index per dataset: a seeded shuffle dealt round-robin.
pub fn fold_assignment(t: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    if t < folds {
        return Err(Error::invalid(format!("{t} datasets cannot fill {folds} folds")));
    }
    let mut order: Vec<usize> = (0..t).collect();
    order.shuffle(&mut rng_from_seed(derive_seed(seed, &["folds"])));
    let mut fold = vec![0; t];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % folds;
    }
    Ok(fold)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub forest: ForestOptions,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            folds: 5,
            seed: 0,
            forest: ForestOptions::default(),
        }
    }
}

/// Mean realized scores per strategy, overall and per fold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub seed: u64,
    pub strategies: Vec<Strategy>,
    /// Per strategy, mean over all datasets of `[acc, nmi, ari]`.
    pub scores: Vec<[f64; 3]>,
    /// Per fold, per strategy, mean over that fold's test datasets.
    pub fold_scores: Vec<Vec<[f64; 3]>>,
    pub outcomes: Vec<SelectionOutcome>,
}

impl CvReport {
    pub fn score(&self, strategy: Strategy, metric: Metric) -> Option<f64> {
        let s = self.strategies.iter().position(|&x| x == strategy)?;
        Some(self.scores[s][metric_index(metric)])
    }
}

fn metric_index(m: Metric) -> usize {
    Metric::ALL.iter().position(|&x| x == m).expect("metric in ALL")
}

/// Cross-validated selection over datasets.
///
/// `matrices` are the ACC, NMI and ARI matrices with identical row and
/// column names; every row needs meta-features in `meta`, whose columns
/// must equal `manifest`. Each fold trains one selector per metric on the
/// other folds and scores its argmax choice on the held-out rows, next to
/// the historical-best baseline of every algorithm present and the EUB.
pub fn cross_validate(meta: &MetaTable, manifest: &Manifest, matrices: &[PerformanceMatrix; 3], opts: &CvOptions) -> Result<CvReport> {
    meta.check_manifest(manifest)?;
    for (pm, metric) in matrices.iter().zip(Metric::ALL) {
        if pm.metric() != metric {
            return Err(Error::invalid(format!("expected the {metric} matrix, got {}", pm.metric())));
        }
        if pm.row_names() != matrices[0].row_names() || pm.col_names() != matrices[0].col_names() {
            return Err(Error::invalid("metric matrices disagree on datasets or configs"));
        }
    }
    let pm0 = &matrices[0];
    let (t, _) = pm0.shape();
    let z_rows: Vec<&[f64]> = pm0
        .row_names()
        .iter()
        .map(|d| {
            meta.row(d)
                .ok_or_else(|| Error::invalid(format!("dataset {d} has no meta-features")))
        })
        .collect::<Result<_>>()?;
    let fold = fold_assignment(t, opts.folds, opts.seed)?;

    let algos: BTreeSet<Algorithm> = pm0.col_names().iter().map(|c| algorithm_of(c)).collect::<Result<_>>()?;
    let mut strategies = vec![Strategy::Regressor];
    strategies.extend(algos.iter().map(|&a| Strategy::HistoricalBest(a)));
    strategies.push(Strategy::Eub);

    let mut outcomes = Vec::new();
    let mut fold_scores = Vec::with_capacity(opts.folds);
    for k in 0..opts.folds {
        let test: Vec<usize> = (0..t).filter(|&i| fold[i] == k).collect();
        let train: Vec<usize> = (0..t).filter(|&i| fold[i] != k).collect();
        let z_train = DMatrix::from_fn(train.len(), manifest.len(), |r, c| z_rows[train[r]][c]);
        let mut per_strategy = vec![[0.0; 3]; strategies.len()];
        for (mi, pm) in matrices.iter().enumerate() {
            let train_pm = select_rows(pm, &train)?;
            let seed = derive_seed(opts.seed, &["forest", &k.to_string(), pm.metric().as_str()]);
            let model = SelectorModel::fit(&z_train, manifest.clone(), &train_pm, opts.forest.clone(), seed)?;
            for (si, &strategy) in strategies.iter().enumerate() {
                let found = match strategy {
                    Strategy::Regressor => test
                        .iter()
                        .map(|&i| {
                            let pred = model.predict_values(z_rows[i])?;
                            let col = argmax_first(&pred).expect("non-empty prediction");
                            Ok(SelectionOutcome {
                                dataset: pm.row_names()[i].clone(),
                                strategy,
                                metric: pm.metric(),
                                config_id: pm.col_names()[col].clone(),
                                realized: realize(pm, i, col)?,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                    _ => baselines(pm, &train, &test, strategy)?,
                };
                per_strategy[si][mi] = crate::stats::mean(&found.iter().map(|o| o.realized).collect::<Vec<_>>());
                outcomes.extend(found);
            }
        }
        fold_scores.push(per_strategy);
    }

    let scores = strategies
        .iter()
        .map(|&s| {
            let mut row = [0.0; 3];
            for (mi, metric) in Metric::ALL.iter().enumerate() {
                let vals: Vec<f64> = outcomes
                    .iter()
                    .filter(|o| o.strategy == s && o.metric == *metric)
                    .map(|o| o.realized)
                    .collect();
                row[mi] = crate::stats::mean(&vals);
            }
            row
        })
        .collect();

    Ok(CvReport {
        folds: opts.folds,
        seed: opts.seed,
        strategies,
        scores,
        fold_scores,
        outcomes,
    })
}

fn select_rows(pm: &PerformanceMatrix, rows: &[usize]) -> Result<PerformanceMatrix> {
    let h = pm.shape().1;
    let values = DMatrix::from_fn(rows.len(), h, |r, c| pm.values()[(rows[r], c)]);
    let mut mask = Mask::empty(rows.len(), h);
    for (r, &i) in rows.iter().enumerate() {
        for c in 0..h {
            mask.set(r, c, pm.mask().get(i, c));
        }
    }
    let names = rows.iter().map(|&i| pm.row_names()[i].clone()).collect();
    PerformanceMatrix::new(values, mask, names, pm.col_names().to_vec(), pm.metric())
}

/// `strategy,acc,nmi,ari` with one row per strategy.
pub fn write_cv_report<W: Write>(w: W, report: &CvReport) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["strategy", "acc", "nmi", "ari"])?;
    for (s, row) in report.strategies.iter().zip(&report.scores) {
        let mut rec = vec![s.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:.6}")));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<cv report>", e))?;
    Ok(())
}
