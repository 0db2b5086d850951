//! Datasets, preprocessing and dataset-level statistics.

mod demo;
mod io;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::rng::rng_from_seed;
use crate::{Error, Result};

pub use demo::{anisotropic, blobs, demo_collection, demo_suite, rings};
pub use io::{load_csv, load_dir, parse_csv, write_csv, LabelSpec, Sidecar};

/// Samples above this count are uniformly subsampled by default.
pub const DEFAULT_CAP: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[derive(Default)]
pub enum Modality {
    #[default]
    Tabular,
    Image,
    Text,
    Bioinfo,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Modality::Tabular => "tabular",
            Modality::Image => "image",
            Modality::Text => "text",
            Modality::Bioinfo => "bioinfo",
        };
        f.write_str(s)
    }
}

/// A feature matrix (samples as rows) with optional ground truth.
///
/// Immutable once built; the constructor enforces finiteness, label
/// contiguity and `2 <= n`, `1 <= m`, `K < n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    name: String,
    x: DMatrix<f64>,
    y: Option<Vec<usize>>,
    k: usize,
    modality: Modality,
}

impl Dataset {
    pub fn new(name: impl Into<String>, x: DMatrix<f64>, y: Option<Vec<usize>>, k: usize, modality: Modality) -> Result<Self> {
        let (n, m) = x.shape();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if n < 2 {
            return Err(Error::invalid(format!("dataset needs n >= 2 samples, got {n}")));
        }
        if m < 1 {
            return Err(Error::invalid("dataset needs at least one feature"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature matrix contains NaN or Inf"));
        }
        if k < 1 || k >= n {
            return Err(Error::invalid(format!("K must satisfy 1 <= K < n, got K={k}, n={n}")));
        }
        if let Some(y) = &y {
            if y.len() != n {
                return Err(Error::LengthMismatch { left: y.len(), right: n });
            }
            let mut seen = vec![false; k];
            for &l in y {
                if l >= k {
                    return Err(Error::invalid(format!("label {l} outside 0..{k}")));
                }
                seen[l] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::invalid("labels must cover every id in 0..K"));
            }
        }
        Ok(Dataset {
            name: name.into(),
            x,
            y,
            k,
            modality,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.y.as_deref()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn m(&self) -> usize {
        self.x.ncols()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same dataset with rows reordered by `perm` (`new[i] = old[perm[i]]`).
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::LengthMismatch {
                left: perm.len(),
                right: self.n(),
            });
        }
        let x = self.x.select_rows(perm.iter());
        let y = self.y.as_ref().map(|y| perm.iter().map(|&i| y[i]).collect());
        Dataset::new(self.name.clone(), x, y, self.k, self.modality)
    }
}

/// Standardizes (optional) and caps the sample count.
///
/// Subsampling happens first, uniformly without replacement and in the
/// original row order; standardization then uses the population standard
/// deviation, mapping constant columns to zero.
pub fn preprocess(d: &Dataset, standardize: bool, cap: usize, seed: u64) -> Result<Dataset> {
    if cap < 2 {
        return Err(Error::invalid(format!("cap must be >= 2, got {cap}")));
    }
    let n = d.n();
    let (mut x, y) = if n > cap {
        let mut rng = rng_from_seed(seed);
        let mut rows = index::sample(&mut rng, n, cap).into_vec();
        rows.sort_unstable();
        let x = d.x.select_rows(rows.iter());
        let y = d.y.as_ref().map(|y| rows.iter().map(|&i| y[i]).collect::<Vec<_>>());
        (x, y)
    } else {
        (d.x.clone(), d.y.clone())
    };
    if standardize {
        standardize_columns(&mut x);
    }
    // Subsampling can drop a rare class entirely; relabel to keep ids contiguous.
    let (y, k) = match y {
        Some(y) => {
            let y = relabel_first_occurrence(&y);
            let k = y.iter().max().map_or(0, |m| m + 1);
            (Some(y), k)
        }
        None => (None, d.k.min(x.nrows() - 1)),
    };
    Dataset::new(d.name.clone(), x, y, k, d.modality)
}

pub(crate) fn standardize_columns(x: &mut DMatrix<f64>) {
    let n = x.nrows() as f64;
    for mut col in x.column_iter_mut() {
        let mu = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
        let sd = var.sqrt();
        let scale = col.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if sd <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            col.fill(0.0);
        } else {
            col.iter_mut().for_each(|v| *v = (*v - mu) / sd);
        }
    }
}

pub(crate) fn relabel_first_occurrence<T: Ord + Clone>(labels: &[T]) -> Vec<usize> {
    let mut ids: BTreeMap<T, usize> = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l.clone()).or_insert(next)
        })
        .collect()
}

/// Class-size imbalance of a labelling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceStats {
    /// Smallest class size over largest class size.
    pub r_mm: f64,
    /// Smallest class size over total sample count.
    pub r_ma: f64,
    /// Population standard deviation of the class proportions.
    pub ir: f64,
}

pub fn imbalance_stats(y: &[usize]) -> Result<ImbalanceStats> {
    if y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in y {
        *counts.entry(l).or_insert(0) += 1;
    }
    if counts.len() < 2 {
        return Err(Error::SingleClass);
    }
    let sizes: Vec<f64> = counts.values().map(|&c| c as f64).collect();
    let n = y.len() as f64;
    let min = sizes.iter().copied().fold(f64::INFINITY, f64::min);
    let max = sizes.iter().copied().fold(0.0, f64::max);
    let props: Vec<f64> = sizes.iter().map(|s| s / n).collect();
    Ok(ImbalanceStats {
        r_mm: min / max,
        r_ma: min / n,
        ir: crate::stats::std_pop(&props),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    Mid,
    High,
}

impl Level {
    /// Feature-dimension band: `m <= 100`, `100 < m <= 500`, `m > 500`.
    pub fn from_dimension(m: usize) -> Self {
        match m {
            0..=100 => Level::Low,
            101..=500 => Level::Mid,
            _ => Level::High,
        }
    }

    /// Imbalance band: `IR < 0.1`, `0.1 <= IR <= 0.3`, `IR > 0.3`.
    pub fn from_ir(ir: f64) -> Self {
        if ir < 0.1 {
            Level::Low
        } else if ir <= 0.3 {
            Level::Mid
        } else {
            Level::High
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Low => "low",
            Level::Mid => "mid",
            Level::High => "high",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTag {
    pub dim_group: Level,
    pub ir_group: Level,
    pub modality: Modality,
}

pub fn group_assign(d: &Dataset, s: &ImbalanceStats) -> GroupTag {
    GroupTag {
        dim_group: Level::from_dimension(d.m()),
        ir_group: Level::from_ir(s.ir),
        modality: d.modality(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts_to_labels(counts: &[usize]) -> Vec<usize> {
        counts.iter().enumerate().flat_map(|(c, &k)| std::iter::repeat_n(c, k)).collect()
    }

    #[test]
    fn balanced_counts() {
        let s = imbalance_stats(&counts_to_labels(&[50, 50])).unwrap();
        assert_eq!(s.r_mm, 1.0);
        assert_eq!(s.r_ma, 0.5);
        assert_eq!(s.ir, 0.0);
    }

    #[test]
    fn echocardiogram_like_counts() {
        let s = imbalance_stats(&counts_to_labels(&[17, 44])).unwrap();
        assert!((s.r_mm - 0.386).abs() < 5e-4);
        assert!((s.r_ma - 0.279).abs() < 5e-4);
        // Published IR for this dataset is 0.221 with population std.
        assert!((s.ir - 0.221).abs() < 5e-4);
    }

    #[test]
    fn one_three_counts_by_hand() {
        let s = imbalance_stats(&counts_to_labels(&[1, 3])).unwrap();
        assert!((s.r_mm - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.r_ma, 0.25);
        // proportions {0.25, 0.75}: mean 0.5, deviations +-0.25
        assert!((s.ir - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_class_is_rejected() {
        assert!(matches!(imbalance_stats(&[3, 3, 3]), Err(Error::SingleClass)));
        assert!(matches!(imbalance_stats(&[]), Err(Error::EmptyDataset)));
    }

    #[test]
    fn group_boundaries() {
        assert_eq!(Level::from_dimension(100), Level::Low);
        assert_eq!(Level::from_dimension(101), Level::Mid);
        assert_eq!(Level::from_dimension(500), Level::Mid);
        assert_eq!(Level::from_dimension(501), Level::High);
        assert_eq!(Level::from_ir(0.1), Level::Mid);
        assert_eq!(Level::from_ir(0.3), Level::Mid);
        assert_eq!(Level::from_ir(0.0999), Level::Low);
        assert_eq!(Level::from_ir(0.3001), Level::High);
    }

    fn dataset_with_dims(m: usize) -> Dataset {
        let x = DMatrix::from_fn(4, m, |i, j| (i * m + j) as f64);
        Dataset::new("d", x, Some(vec![0, 0, 1, 1]), 2, Modality::Image).unwrap()
    }

    #[test]
    fn group_assign_examples() {
        let s = |ir| ImbalanceStats { r_mm: 1.0, r_ma: 0.5, ir };
        let t = group_assign(&dataset_with_dims(100), &s(0.05));
        assert_eq!((t.dim_group, t.ir_group), (Level::Low, Level::Low));
        let t = group_assign(&dataset_with_dims(784), &s(0.001));
        assert_eq!((t.dim_group, t.ir_group), (Level::High, Level::Low));
        let t = group_assign(&dataset_with_dims(300), &s(0.35));
        assert_eq!((t.dim_group, t.ir_group), (Level::Mid, Level::High));
        assert_eq!(t.modality, Modality::Image);
    }

    #[test]
    fn dataset_invariants_enforced() {
        let x = DMatrix::from_element(3, 2, 1.0);
        assert!(Dataset::new("a", x.clone(), None, 3, Modality::Tabular).is_err());
        assert!(Dataset::new("a", x.clone(), Some(vec![0, 2, 2]), 3, Modality::Tabular).is_err());
        let mut bad = x.clone();
        bad[(0, 0)] = f64::NAN;
        assert!(Dataset::new("a", bad, None, 2, Modality::Tabular).is_err());
        assert!(Dataset::new("a", x, Some(vec![0, 1, 1]), 2, Modality::Tabular).is_ok());
    }

    fn big_dataset(n: usize) -> Dataset {
        let x = DMatrix::from_fn(n, 3, |i, j| ((i * 7 + j * 13) % 101) as f64);
        let y: Vec<usize> = (0..n).map(|i| i % 3).collect();
        Dataset::new("big", x, Some(y), 3, Modality::Tabular).unwrap()
    }

    #[test]
    fn subsample_to_cap() {
        let d = big_dataset(12_000);
        let p = preprocess(&d, false, DEFAULT_CAP, 9).unwrap();
        assert_eq!(p.n(), 10_000);
        assert_eq!(p.labels().unwrap().len(), 10_000);
        let again = preprocess(&d, false, DEFAULT_CAP, 9).unwrap();
        assert_eq!(p, again);
        let other = preprocess(&d, false, DEFAULT_CAP, 10).unwrap();
        assert_ne!(p.x(), other.x());
    }

    #[test]
    fn subsample_keeps_labels_aligned() {
        let n = 50;
        // Feature 0 encodes the label so alignment is checkable.
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { (i % 2) as f64 } else { i as f64 });
        let d = Dataset::new("a", x, Some(y), 2, Modality::Tabular).unwrap();
        let p = preprocess(&d, false, 20, 3).unwrap();
        let y = p.labels().unwrap();
        let first = y[0];
        for (i, &l) in y.iter().enumerate() {
            // first-occurrence relabeling may swap ids but keeps the pairing
            let orig = p.x()[(i, 0)] as usize;
            assert_eq!(orig == p.x()[(0, 0)] as usize, l == first);
        }
    }

    #[test]
    fn standardization_idempotent_and_constant_safe() {
        let x = DMatrix::from_fn(20, 3, |i, j| match j {
            0 => i as f64 * 0.5 + 3.0,
            1 => 7.0,
            _ => ((i * i) % 11) as f64,
        });
        let d = Dataset::new("s", x, None, 2, Modality::Tabular).unwrap();
        let once = preprocess(&d, true, DEFAULT_CAP, 0).unwrap();
        assert!(once.x().column(1).iter().all(|&v| v == 0.0));
        let col0 = once.x().column(0);
        let mu = col0.iter().sum::<f64>() / 20.0;
        let var = col0.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / 20.0;
        assert!(mu.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
        let twice = preprocess(&once, true, DEFAULT_CAP, 0).unwrap();
        for (a, b) in once.x().iter().zip(twice.x().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_below_two_rejected() {
        let d = big_dataset(10);
        assert!(preprocess(&d, false, 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn imbalance_invariants(counts in proptest::collection::vec(1usize..40, 2..7), seed in 0u64..1000) {
            let y = counts_to_labels(&counts);
            let s = imbalance_stats(&y).unwrap();
            let k = counts.len() as f64;
            prop_assert!(s.r_ma <= s.r_mm + 1e-15);
            prop_assert!(s.r_ma <= 1.0 / k + 1e-15);
            prop_assert!(s.r_mm > 0.0 && s.r_mm <= 1.0);
            // permutation and renaming invariance
            let mut perm = y.clone();
            let mut rng = crate::rng::rng_from_seed(seed);
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
            let renamed: Vec<usize> = perm.iter().map(|l| 100 - l * 3).collect();
            let t = imbalance_stats(&renamed).unwrap();
            prop_assert!((s.r_mm - t.r_mm).abs() < 1e-15);
            prop_assert!((s.r_ma - t.r_ma).abs() < 1e-15);
            prop_assert!((s.ir - t.ir).abs() < 1e-12);
        }

        #[test]
        fn grouping_is_total(m in 0usize..5000, ir in 0.0f64..1.0) {
            let _ = (Level::from_dimension(m), Level::from_ir(ir));
        }
    }
}
