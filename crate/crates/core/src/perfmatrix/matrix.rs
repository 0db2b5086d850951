use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::cluster::Algorithm;
use crate::metrics::Metric;
use crate::sweep::{algorithm_of, enumerate_grid, Reducer, RunResult};
use crate::{Error, Result};

/// Observation mask, row-major; `true` marks an observed entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn full(rows: usize, cols: usize) -> Self {
        Mask {
            rows,
            cols,
            data: vec![true; rows * cols],
        }
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        Mask {
            rows,
            cols,
            data: vec![false; rows * cols],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.data[i * self.cols + j] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn row_counts(&self) -> Vec<usize> {
        (0..self.rows).map(|i| (0..self.cols).filter(|&j| self.get(i, j)).count()).collect()
    }

    pub fn col_counts(&self) -> Vec<usize> {
        (0..self.cols).map(|j| (0..self.rows).filter(|&i| self.get(i, j)).count()).collect()
    }

    /// Entries observed here but not in `other`.
    pub fn minus(&self, other: &Mask) -> Mask {
        Mask {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a && !b).collect(),
        }
    }

    pub fn is_full(&self) -> bool {
        self.data.iter().all(|&b| b)
    }
}

/// Dataset-by-config scores for one metric. Unobserved entries hold 0 in
/// `values` and `false` in the mask.
#[derive(Clone, Debug, PartialEq)]
pub struct PerformanceMatrix {
    values: DMatrix<f64>,
    mask: Mask,
    row_names: Vec<String>,
    col_names: Vec<String>,
    metric: Metric,
}

impl PerformanceMatrix {
    pub fn new(values: DMatrix<f64>, mask: Mask, row_names: Vec<String>, col_names: Vec<String>, metric: Metric) -> Result<Self> {
        let (n, h) = values.shape();
        if mask.shape() != (n, h) || row_names.len() != n || col_names.len() != h {
            return Err(Error::invalid("performance matrix parts have inconsistent shapes"));
        }
        let (lo, hi) = metric.range();
        for i in 0..n {
            for j in 0..h {
                if mask.get(i, j) {
                    let v = values[(i, j)];
                    if !(v.is_finite() && (lo..=hi).contains(&v)) {
                        return Err(Error::invalid(format!(
                            "entry ({}, {}) = {v} outside the {metric} range",
                            row_names[i], col_names[j]
                        )));
                    }
                }
            }
        }
        let mut values = values;
        for i in 0..n {
            for j in 0..h {
                if !mask.get(i, j) {
                    values[(i, j)] = 0.0;
                }
            }
        }
        Ok(PerformanceMatrix {
            values,
            mask,
            row_names,
            col_names,
            metric,
        })
    }

    /// A fully observed matrix.
    pub fn dense(values: DMatrix<f64>, row_names: Vec<String>, col_names: Vec<String>, metric: Metric) -> Result<Self> {
        let (n, h) = values.shape();
        PerformanceMatrix::new(values, Mask::full(n, h), row_names, col_names, metric)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn row_names(&self) -> &[String] {
        &self.row_names
    }

    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.mask.get(i, j).then(|| self.values[(i, j)])
    }

    /// The values, provided every entry is observed.
    pub fn require_dense(&self) -> Result<&DMatrix<f64>> {
        if self.mask.is_full() {
            Ok(&self.values)
        } else {
            Err(Error::invalid("operation undefined on a matrix with unobserved entries"))
        }
    }

    /// Keeps the rows whose entries are all observed.
    pub fn complete_rows(&self) -> PerformanceMatrix {
        let keep: Vec<usize> = (0..self.values.nrows())
            .filter(|&i| (0..self.values.ncols()).all(|j| self.mask.get(i, j)))
            .collect();
        let h = self.values.ncols();
        PerformanceMatrix {
            values: DMatrix::from_fn(keep.len(), h, |r, j| self.values[(keep[r], j)]),
            mask: Mask::full(keep.len(), h),
            row_names: keep.iter().map(|&i| self.row_names[i].clone()).collect(),
            col_names: self.col_names.clone(),
            metric: self.metric,
        }
    }
}

/// Column sort key: roster position, position in the built-in grid, id.
pub(crate) fn column_key(config_id: &str) -> (usize, usize, String) {
    match algorithm_of(config_id) {
        Ok(a) => {
            let pos = enumerate_grid(a).position(config_id).unwrap_or(usize::MAX);
            (a.index(), pos, config_id.to_owned())
        }
        Err(_) => (Algorithm::ALL.len(), usize::MAX, config_id.to_owned()),
    }
}

/// Builds one metric's matrix from run results, averaging repeats.
///
/// Rows are sorted by dataset name and columns in roster-then-grid order.
/// Cells with no observed repeat (failed runs or absent cells) are
/// unobserved.
pub fn build_matrix(results: &[RunResult], metric: Metric) -> Result<PerformanceMatrix> {
    build_matrix_with(results, metric, Reducer::Mean)
}

pub fn build_matrix_with(results: &[RunResult], metric: Metric, reducer: Reducer) -> Result<PerformanceMatrix> {
    let mut seen = BTreeSet::new();
    let mut datasets = BTreeSet::new();
    let mut configs = BTreeSet::new();
    let mut cells: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
    for r in results {
        if !seen.insert((r.dataset.as_str(), r.config_id.as_str(), r.repeat)) {
            return Err(Error::DuplicateCell {
                dataset: r.dataset.clone(),
                config_id: r.config_id.clone(),
                repeat: r.repeat,
            });
        }
        datasets.insert(r.dataset.as_str());
        configs.insert(r.config_id.as_str());
        let e = cells.entry((r.dataset.as_str(), r.config_id.as_str())).or_default();
        if let Some(v) = r.metric(metric) {
            e.push(v);
        }
    }
    if datasets.is_empty() {
        return Err(Error::invalid("no results"));
    }
    let rows: Vec<&str> = datasets.into_iter().collect();
    let mut cols: Vec<&str> = configs.into_iter().collect();
    cols.sort_by_cached_key(|c| column_key(c));
    let mut values = DMatrix::zeros(rows.len(), cols.len());
    let mut mask = Mask::empty(rows.len(), cols.len());
    for (i, d) in rows.iter().enumerate() {
        for (j, c) in cols.iter().enumerate() {
            if let Some(vs) = cells.get_mut(&(*d, *c)) {
                vs.sort_by(f64::total_cmp);
                if let Some(v) = reducer.reduce(vs) {
                    values[(i, j)] = v;
                    mask.set(i, j, true);
                }
            }
        }
    }
    PerformanceMatrix::new(
        values,
        mask,
        rows.into_iter().map(String::from).collect(),
        cols.into_iter().map(String::from).collect(),
        metric,
    )
}

/// CSV with a `dataset` header cell, config ids across the first row and
/// dataset names down the first column; empty cells are unobserved.
pub fn write_matrix<W: Write>(w: W, pm: &PerformanceMatrix) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["dataset".to_owned()];
    header.extend(pm.col_names.iter().cloned());
    wr.write_record(&header)?;
    for (i, name) in pm.row_names.iter().enumerate() {
        let mut rec = vec![name.clone()];
        rec.extend((0..pm.col_names.len()).map(|j| pm.get(i, j).map(|v| v.to_string()).unwrap_or_default()));
        wr.write_record(&rec)?;
    }
    wr.flush().map_err(|e| Error::io("matrix", e))?;
    Ok(())
}

pub fn read_matrix<R: Read>(r: R, metric: Metric) -> Result<PerformanceMatrix> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rd.headers()?.clone();
    if header.len() < 2 {
        return Err(Error::invalid("matrix needs at least one config column"));
    }
    let col_names: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let unique: BTreeSet<&String> = col_names.iter().collect();
    if unique.len() != col_names.len() || col_names.iter().any(String::is_empty) {
        return Err(Error::invalid("config ids must be unique and non-empty"));
    }
    let h = col_names.len();
    let mut row_names = Vec::new();
    let mut vals = Vec::new();
    let mut obs = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != h + 1 {
            return Err(Error::invalid(format!("line {line}: expected {} fields", h + 1)));
        }
        if rec[0].is_empty() {
            return Err(Error::invalid(format!("line {line}: empty dataset name")));
        }
        row_names.push(rec[0].to_owned());
        for field in rec.iter().skip(1) {
            if field.is_empty() {
                vals.push(0.0);
                obs.push(false);
            } else {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::invalid(format!("line {line}: bad value {field:?}")))?;
                vals.push(v);
                obs.push(true);
            }
        }
    }
    let n = row_names.len();
    if n == 0 {
        return Err(Error::invalid("matrix has no rows"));
    }
    let unique: BTreeSet<&String> = row_names.iter().collect();
    if unique.len() != n {
        return Err(Error::invalid("dataset names must be unique"));
    }
    let values = DMatrix::from_row_slice(n, h, &vals);
    let mask = Mask {
        rows: n,
        cols: h,
        data: obs,
    };
    PerformanceMatrix::new(values, mask, row_names, col_names, metric)
}
