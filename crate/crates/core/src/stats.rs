//! Small descriptive-statistics helpers shared across modules.

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (ddof = 0).
pub(crate) fn variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / xs.len() as f64
}

pub(crate) fn std_pop(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

/// Sample variance (ddof = 1).
pub(crate) fn variance_sample(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (xs.len() - 1) as f64
}

pub(crate) fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Percentile with linear interpolation between closest ranks, on sorted input.
/// `q` is in `[0, 100]`.
pub(crate) fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n == 1 {
        return sorted[0];
    }
    let pos = q / 100.0 * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub(crate) fn median(xs: &[f64]) -> f64 {
    percentile_sorted(&sorted(xs), 50.0)
}

/// k-th central moment, biased (divides by n).
pub(crate) fn central_moment(xs: &[f64], k: i32) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu).powi(k)).sum::<f64>() / xs.len() as f64
}

/// Biased sample skewness `m3 / m2^1.5`; `None` when the data are constant.
pub(crate) fn skewness(xs: &[f64]) -> Option<f64> {
    let m2 = central_moment(xs, 2);
    if !(m2 > 0.0) || !relative_spread_ok(xs, m2) {
        return None;
    }
    Some(central_moment(xs, 3) / m2.powf(1.5))
}

/// Pearson kurtosis `m4 / m2^2` (not excess); `None` when constant.
pub(crate) fn kurtosis(xs: &[f64]) -> Option<f64> {
    let m2 = central_moment(xs, 2);
    if !(m2 > 0.0) || !relative_spread_ok(xs, m2) {
        return None;
    }
    Some(central_moment(xs, 4) / (m2 * m2))
}

// Variance that is pure rounding noise relative to the magnitude of the
// values counts as constant.
fn relative_spread_ok(xs: &[f64], m2: f64) -> bool {
    let scale = xs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    m2.sqrt() > 1e-12 * scale.max(f64::MIN_POSITIVE)
}

/// Average ranks (1-based) with ties sharing the mean of their positions.
/// Larger values get smaller ranks when `descending` is true.
pub(crate) fn average_ranks(xs: &[f64], descending: bool) -> Vec<f64> {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        let o = xs[a].total_cmp(&xs[b]);
        if descending {
            o.reverse()
        } else {
            o
        }
    });
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}
