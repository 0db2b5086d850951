use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::landmark::fit_labels;
use super::normality::normal_test_p;
use super::{canonical_rows, Builder, MetaVector};
use crate::data::Dataset;
use crate::points::Points;
use crate::stats::{central_moment, kurtosis, mean, percentile_sorted, skewness, std_pop, variance};
use crate::Result;

/// Coordinates in the statistical block.
pub(crate) const STATISTICAL_COUNT: usize = 76;

/// Columns with at most this many distinct values count as categorical.
const CATEGORICAL_MAX_UNIQUE: usize = 10;
const ENTROPY_BINS: usize = 32;
const NORMALITY_ALPHA: f64 = 0.05;

/// Statistical descriptors of a dataset.
///
/// Per-feature quantities are averaged over the features where they are
/// defined; list-valued quantities (skewness, kurtosis, correlation,
/// covariance, sparsity, ANOVA p-values) are summarized by min, max, mean,
/// std, skewness and kurtosis, and normalized entropy by min, max, std and
/// mean. The ANOVA groups are the two-cluster KMeans landmarker labels for
/// `seed`.
pub fn statistical_features(d: &Dataset, seed: u64) -> Result<MetaVector> {
    statistical_block(&canonical_rows(d.x()), seed)
}

pub(crate) fn statistical_block(pts: &Points, seed: u64) -> Result<MetaVector> {
    let (n, m) = (pts.n(), pts.m());
    let nf = n as f64;
    let mf = m as f64;
    let cols: Vec<Vec<f64>> = (0..m).map(|j| (0..n).map(|i| pts.row(i)[j]).collect()).collect();
    let groups = fit_labels(pts, 2, seed)?;
    let per: Vec<Column> = cols.par_iter().map(|c| Column::describe(c, groups.as_deref())).collect();

    let mut b = Builder::default();
    let general = "stat/general";
    b.push("n", general, Some(nf), false);
    b.push("p_over_n", general, Some(mf / nf), false);
    b.push("log_n", general, Some(nf.ln()), false);
    b.push("log_n_over_p", general, Some((nf / mf).ln()), false);
    b.push("p", general, Some(mf), false);
    b.push("log_p", general, Some(mf.ln()), false);
    let categorical = per.iter().filter(|c| c.unique <= CATEGORICAL_MAX_UNIQUE).count();
    b.push("pct_categorical", general, Some(categorical as f64 / mf), false);

    let avg = |b: &mut Builder, name: &str, tag: &str, f: &dyn Fn(&Column) -> Option<f64>| {
        let vals: Vec<Option<f64>> = per.iter().map(f).collect();
        let defined: Vec<f64> = vals.iter().flatten().copied().collect();
        let flagged = defined.len() < vals.len();
        b.push(name, tag, (!defined.is_empty()).then(|| mean(&defined)), flagged);
    };
    avg(&mut b, "mean", "stat/location", &|c| Some(c.mean));
    avg(&mut b, "median", "stat/location", &|c| Some(c.median));
    avg(&mut b, "var", "stat/dispersion", &|c| Some(c.var));
    avg(&mut b, "min", "stat/range", &|c| Some(c.min));
    avg(&mut b, "max", "stat/range", &|c| Some(c.max));
    avg(&mut b, "std", "stat/dispersion", &|c| Some(c.std));
    for (q, name) in [(0, "q1"), (1, "q25"), (2, "q75"), (3, "q99")] {
        avg(&mut b, name, "stat/percentile", &|c| Some(c.quantiles[q]));
    }
    avg(&mut b, "iqr", "stat/dispersion", &|c| Some(c.quantiles[2] - c.quantiles[1]));
    avg(&mut b, "normalized_mean", "stat/range", &|c| ratio(c.mean, c.max));
    avg(&mut b, "normalized_median", "stat/range", &|c| ratio(c.median, c.max));
    avg(&mut b, "range", "stat/range", &|c| Some(c.max - c.min));
    avg(&mut b, "gini", "stat/dispersion", &|c| c.gini);
    avg(&mut b, "median_absolute_deviation", "stat/dispersion", &|c| Some(c.mad));
    avg(&mut b, "average_absolute_deviation", "stat/dispersion", &|c| Some(c.aad));
    avg(&mut b, "quantile_coefficient_dispersion", "stat/dispersion", &|c| {
        ratio(c.quantiles[2] - c.quantiles[1], c.quantiles[2] + c.quantiles[1])
    });
    avg(&mut b, "coefficient_of_variance", "stat/dispersion", &|c| ratio(c.var, c.mean));
    avg(&mut b, "outlier_outside_1_99", "stat/outlier", &|c| Some(c.outside_1_99));
    avg(&mut b, "outlier_3std", "stat/outlier", &|c| Some(c.outside_3std));
    avg(&mut b, "normal_test_rejection", "stat/normality", &|c| {
        c.normal_p.map(|p| if p < NORMALITY_ALPHA { 1.0 } else { 0.0 })
    });
    for k in 5..=10 {
        avg(&mut b, &format!("moment_{k}"), "stat/moment", &|c| Some(c.moments[k - 5]));
    }

    let listed = |f: &dyn Fn(&Column) -> Option<f64>| -> (Vec<f64>, bool) {
        let vals: Vec<Option<f64>> = per.iter().map(f).collect();
        let defined: Vec<f64> = vals.iter().flatten().copied().collect();
        let flagged = defined.len() < vals.len();
        (defined, flagged)
    };
    let (skews, f) = listed(&|c| c.skewness);
    six(&mut b, "skewness", "stat/normality", &skews, f);
    let (kurts, f) = listed(&|c| c.kurtosis);
    six(&mut b, "kurtosis", "stat/normality", &kurts, f);
    let pairs = pair_statistics(&cols, &per);
    six(
        &mut b,
        "correlation",
        "stat/interdependence",
        &pairs.correlation,
        pairs.correlation_flagged,
    );
    six(&mut b, "covariance", "stat/interdependence", &pairs.covariance, false);
    let (sparsity, f) = listed(&|c| Some(c.unique as f64 / nf));
    six(&mut b, "sparsity", "stat/discreteness", &sparsity, f);
    let (anova, f) = listed(&|c| c.anova_p);
    six(&mut b, "anova_p", "stat/redundancy", &anova, f);

    avg(&mut b, "coefficient_of_variation", "stat/dispersion", &|c| ratio(c.std, c.mean));
    let (entropy, f) = listed(&|c| Some(c.entropy));
    let tag = "stat/informativeness";
    let empty = entropy.is_empty();
    b.push("entropy_min", tag, (!empty).then(|| fold_min(&entropy)), f);
    b.push("entropy_max", tag, (!empty).then(|| fold_max(&entropy)), f);
    b.push("entropy_std", tag, (!empty).then(|| std_pop(&entropy)), f);
    b.push("entropy_mean", tag, (!empty).then(|| mean(&entropy)), f);

    let mv = b.finish()?;
    debug_assert_eq!(mv.len(), STATISTICAL_COUNT);
    Ok(mv)
}

/// Min, max, mean, std, skewness and kurtosis of a list.
fn six(b: &mut Builder, prefix: &str, tag: &str, xs: &[f64], flagged: bool) {
    let some = !xs.is_empty();
    b.push(format!("{prefix}_min"), tag, some.then(|| fold_min(xs)), flagged);
    b.push(format!("{prefix}_max"), tag, some.then(|| fold_max(xs)), flagged);
    b.push(format!("{prefix}_mean"), tag, some.then(|| mean(xs)), flagged);
    b.push(format!("{prefix}_std"), tag, some.then(|| std_pop(xs)), flagged);
    b.push(format!("{prefix}_skewness"), tag, skewness(xs), flagged);
    b.push(format!("{prefix}_kurtosis"), tag, kurtosis(xs), flagged);
}

fn fold_min(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

fn fold_max(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `num / den`, undefined when the denominator vanishes relative to its
/// inputs.
fn ratio(num: f64, den: f64) -> Option<f64> {
    let scale = num.abs().max(den.abs());
    if den == 0.0 || den.abs() <= 1e-12 * scale {
        return None;
    }
    Some(num / den)
}

struct Column {
    mean: f64,
    median: f64,
    var: f64,
    std: f64,
    min: f64,
    max: f64,
    quantiles: [f64; 4],
    gini: Option<f64>,
    mad: f64,
    aad: f64,
    outside_1_99: f64,
    outside_3std: f64,
    normal_p: Option<f64>,
    moments: [f64; 6],
    skewness: Option<f64>,
    kurtosis: Option<f64>,
    unique: usize,
    entropy: f64,
    anova_p: Option<f64>,
}

impl Column {
    fn describe(x: &[f64], groups: Option<&[usize]>) -> Column {
        let n = x.len() as f64;
        let s = crate::stats::sorted(x);
        let mu = mean(x);
        let var = variance(x);
        let std = var.sqrt();
        let (min, max) = (s[0], s[s.len() - 1]);
        let median = percentile_sorted(&s, 50.0);
        let quantiles = [1.0, 25.0, 75.0, 99.0].map(|q| percentile_sorted(&s, q));

        let shifted_sum: f64 = s.iter().map(|v| v - min).sum();
        let gini = (shifted_sum > 0.0).then(|| {
            let w: f64 = s
                .iter()
                .enumerate()
                .map(|(i, v)| (2.0 * (i + 1) as f64 - n - 1.0) * (v - min))
                .sum();
            w / (n * shifted_sum)
        });

        let abs_dev: Vec<f64> = x.iter().map(|v| (v - median).abs()).collect();
        let mad = crate::stats::median(&abs_dev);
        let aad = mean(&abs_dev);
        let outside_1_99 = x.iter().filter(|&&v| v < quantiles[0] || v > quantiles[3]).count() as f64 / n;
        let outside_3std = x.iter().filter(|&&v| (v - mu).abs() > 3.0 * std).count() as f64 / n;

        let mut unique = 1;
        for w in s.windows(2) {
            if w[1] != w[0] {
                unique += 1;
            }
        }

        Column {
            mean: mu,
            median,
            var,
            std,
            min,
            max,
            quantiles,
            gini,
            mad,
            aad,
            outside_1_99,
            outside_3std,
            normal_p: normal_test_p(x),
            moments: [5, 6, 7, 8, 9, 10].map(|k| central_moment(x, k)),
            skewness: skewness(x),
            kurtosis: kurtosis(x),
            unique,
            entropy: normalized_entropy(x, min, max),
            anova_p: groups.and_then(|g| anova_p(x, g)),
        }
    }
}

/// Shannon entropy (bits) of a 32-bin equal-width histogram over
/// `[min, max]`, divided by `log2 n`.
fn normalized_entropy(x: &[f64], min: f64, max: f64) -> f64 {
    let n = x.len();
    let mut counts = [0usize; ENTROPY_BINS];
    let width = max - min;
    for &v in x {
        let bin = if width > 0.0 {
            (((v - min) / width * ENTROPY_BINS as f64) as usize).min(ENTROPY_BINS - 1)
        } else {
            0
        };
        counts[bin] += 1;
    }
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum();
    h / (n as f64).log2()
}

/// One-way ANOVA p-value of `x` grouped by `groups`. Zero within-group
/// variance gives 0 when the group means differ, and is undefined otherwise.
fn anova_p(x: &[f64], groups: &[usize]) -> Option<f64> {
    let g = groups.iter().max().map_or(0, |v| v + 1);
    let n = x.len();
    if g < 2 || n <= g {
        return None;
    }
    let mut sums = vec![0.0; g];
    let mut counts = vec![0usize; g];
    for (&v, &l) in x.iter().zip(groups) {
        sums[l] += v;
        counts[l] += 1;
    }
    let grand = mean(x);
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let ssb: f64 = means.iter().zip(&counts).map(|(mu, &c)| c as f64 * (mu - grand).powi(2)).sum();
    let ssw: f64 = x.iter().zip(groups).map(|(v, &l)| (v - means[l]).powi(2)).sum();
    let df1 = (counts.iter().filter(|&&c| c > 0).count() - 1) as f64;
    let df2 = n as f64 - df1 - 1.0;
    if df1 < 1.0 {
        return None;
    }
    if ssw == 0.0 {
        return (ssb > 0.0).then_some(0.0);
    }
    let f = (ssb / df1) / (ssw / df2);
    let dist = FisherSnedecor::new(df1, df2).ok()?;
    Some(dist.sf(f).clamp(0.0, 1.0))
}

struct Pairs {
    correlation: Vec<f64>,
    correlation_flagged: bool,
    covariance: Vec<f64>,
}

/// Off-diagonal correlation and covariance entries (upper triangle).
/// Pairs involving a constant column have no correlation.
fn pair_statistics(cols: &[Vec<f64>], per: &[Column]) -> Pairs {
    let m = cols.len();
    let n = cols.first().map_or(0, Vec::len) as f64;
    let centered: Vec<Vec<f64>> = cols.iter().zip(per).map(|(c, d)| c.iter().map(|v| v - d.mean).collect()).collect();
    let ss: Vec<f64> = centered.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let rows: Vec<Vec<(f64, Option<f64>)>> = (0..m)
        .into_par_iter()
        .map(|a| {
            ((a + 1)..m)
                .map(|b| {
                    let dot: f64 = centered[a].iter().zip(&centered[b]).map(|(p, q)| p * q).sum();
                    let corr = (ss[a] > 0.0 && ss[b] > 0.0).then(|| (dot / (ss[a] * ss[b]).sqrt()).clamp(-1.0, 1.0));
                    (dot / n, corr)
                })
                .collect()
        })
        .collect();
    let mut out = Pairs {
        correlation: Vec::new(),
        correlation_flagged: false,
        covariance: Vec::new(),
    };
    for (cov, corr) in rows.into_iter().flatten() {
        out.covariance.push(cov);
        match corr {
            Some(c) => out.correlation.push(c),
            None => out.correlation_flagged = true,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{blobs, preprocess};
    use nalgebra::DMatrix;

    fn dataset(x: DMatrix<f64>) -> Dataset {
        Dataset::new("t", x, None, 2, Default::default()).unwrap()
    }

    #[test]
    fn block_has_fixed_size_and_unique_names() {
        let d = blobs("b", &[vec![0.0, 0.0, 1.0], vec![5.0, 5.0, 0.0]], &[20, 20], 1.0, 1).unwrap();
        let mv = statistical_features(&d, 0).unwrap();
        assert_eq!(mv.len(), STATISTICAL_COUNT);
        let mut names = mv.manifest().names();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), STATISTICAL_COUNT);
    }

    #[test]
    fn standardized_mean_and_std() {
        let d = blobs("b", &[vec![3.0, -2.0, 10.0], vec![8.0, 1.0, 4.0]], &[50, 30], 2.0, 4).unwrap();
        let d = preprocess(&d, true, 10_000, 0).unwrap();
        let mv = statistical_features(&d, 0).unwrap();
        assert!(mv.get("mean").unwrap().abs() < 1e-9);
        assert!((mv.get("std").unwrap() - 1.0).abs() < 1e-9);
        assert!((mv.get("var").unwrap() - 1.0).abs() < 1e-9);
        // mean is zero, so both variation coefficients are undefined
        assert!(mv.is_imputed("coefficient_of_variation").unwrap());
        assert_eq!(mv.get("coefficient_of_variation"), Some(0.0));
    }

    #[test]
    fn identical_features_correlate_perfectly() {
        let x = DMatrix::from_fn(30, 3, |i, j| if j < 2 { ((i * 7) % 11) as f64 * 0.3 } else { (i as f64).sin() });
        let mv = statistical_features(&dataset(x), 0).unwrap();
        assert_eq!(mv.get("correlation_max"), Some(1.0));
        assert!(!mv.is_imputed("correlation_max").unwrap());
    }

    #[test]
    fn single_feature_imputes_correlation_block() {
        let x = DMatrix::from_fn(20, 1, |i, _| (i as f64).sqrt());
        let mv = statistical_features(&dataset(x), 0).unwrap();
        for agg in ["min", "max", "mean", "std", "skewness", "kurtosis"] {
            for prefix in ["correlation", "covariance"] {
                let name = format!("{prefix}_{agg}");
                assert_eq!(mv.get(&name), Some(0.0), "{name}");
                assert_eq!(mv.is_imputed(&name), Some(true), "{name}");
            }
        }
    }

    #[test]
    fn hand_computed_column_statistics() {
        let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 10.0]);
        let mv = statistical_features(&dataset(x), 0).unwrap();
        // shifted values 0,1,2,9: sum 12, weights -3,-1,1,3
        assert!((mv.get("gini").unwrap() - (0.0 - 1.0 + 2.0 + 27.0) / (4.0 * 12.0)).abs() < 1e-12);
        assert_eq!(mv.get("median"), Some(2.5));
        // |x - 2.5| = 1.5, 0.5, 0.5, 7.5
        assert_eq!(mv.get("median_absolute_deviation"), Some(1.0));
        assert_eq!(mv.get("average_absolute_deviation"), Some(2.5));
        assert_eq!(mv.get("normalized_mean"), Some(0.4));
        assert_eq!(mv.get("range"), Some(9.0));
        assert_eq!(mv.get("sparsity_mean"), Some(1.0));
        assert_eq!(mv.get("pct_categorical"), Some(1.0));
        // n < 8: the normality test is undefined
        assert!(mv.is_imputed("normal_test_rejection").unwrap());
    }

    #[test]
    fn entropy_bounds() {
        assert_eq!(normalized_entropy(&[2.0; 16], 2.0, 2.0), 0.0);
        let xs: Vec<f64> = (0..32).map(|i| i as f64).collect();
        // one sample per bin: H = log2 32 = log2 n
        assert!((normalized_entropy(&xs, 0.0, 31.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn anova_detects_shift() {
        let x: Vec<f64> = (0..20)
            .map(|i| if i < 10 { i as f64 * 0.1 } else { 5.0 + i as f64 * 0.1 })
            .collect();
        let g: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        assert!(anova_p(&x, &g).unwrap() < 1e-10);
        let same: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let y: Vec<f64> = (0..20).map(|i| (i / 2) as f64).collect();
        assert!((anova_p(&y, &same).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(anova_p(&[1.0, 1.0, 2.0, 2.0], &[0, 0, 1, 1]), Some(0.0));
    }

    #[test]
    fn no_nan_on_constant_data() {
        let x = DMatrix::from_element(12, 3, 4.0);
        let mv = statistical_features(&dataset(x), 0).unwrap();
        assert!(mv.values().iter().all(|v| v.is_finite()));
    }
}
