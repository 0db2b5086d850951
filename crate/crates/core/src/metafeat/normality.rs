use crate::stats::{kurtosis, skewness};

/// Smallest sample the omnibus test accepts.
const MIN_N: usize = 8;

/// p-value of the D'Agostino-Pearson K² normality test, combining the
/// skewness z-score and the Anscombe-Glynn kurtosis z-score. `None` below 8
/// samples or for constant data.
pub fn normal_test_p(xs: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < MIN_N {
        return None;
    }
    let zs = skew_z(xs)?;
    let zk = kurtosis_z(xs)?;
    let k2 = zs * zs + zk * zk;
    // chi-square with two degrees of freedom
    Some((-k2 / 2.0).exp())
}

fn skew_z(xs: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let b2 = skewness(xs)?;
    let y = b2 * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    let y = if y == 0.0 { 1.0 } else { y };
    let r = y / alpha;
    Some(delta * (r + (r * r + 1.0).sqrt()).ln())
}

fn kurtosis_z(xs: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let b2 = kurtosis(xs)?;
    let e = 3.0 * (n - 1.0) / (n + 1.0);
    let var_b2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    let x = (b2 - e) / var_b2.sqrt();
    let sqrt_beta1 =
        6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + (1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    let term2 = if denom == 0.0 {
        99.0
    } else {
        denom.signum() * ((1.0 - 2.0 / a) / denom.abs()).cbrt()
    };
    Some((term1 - term2) / (2.0 / (9.0 * a)).sqrt())
}
