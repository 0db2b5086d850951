use nalgebra::DMatrix;

use super::spectral::spectral_labels;
use crate::rng::BenchRng;
use crate::{Error, Result};

const RHO: f64 = 1.0;
const MAX_ITER: usize = 200;
const TOL: f64 = 1e-4;

/// Self-expressive coefficients: column `i` of `C` solves
/// `min ||c||_1 + lambda/2 ||x_i - sum_j c_j x_j||^2` with `c_i = 0`, all
/// columns at once by ADMM. `x` holds one sample per row.
pub fn ssc_coefficients(x: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let (n, m) = x.shape();
    let gram = x * x.transpose();
    let lg = &gram * lambda;
    // (lambda G + rho I)^-1 applied to a right-hand side
    let solve: Box<dyn Fn(&DMatrix<f64>) -> DMatrix<f64>> = if m < n {
        let mut small = x.transpose() * x * lambda;
        for i in 0..m {
            small[(i, i)] += RHO;
        }
        let small = small.cholesky().expect("rho I + lambda X'X is positive definite");
        Box::new(move |r: &DMatrix<f64>| {
            let inner = small.solve(&(x.transpose() * r));
            (r - x * inner * lambda) / RHO
        })
    } else {
        let mut big = lg.clone();
        for i in 0..n {
            big[(i, i)] += RHO;
        }
        let big = big.cholesky().expect("lambda G + rho I is positive definite");
        Box::new(move |r: &DMatrix<f64>| big.solve(r))
    };

    let mut c = DMatrix::zeros(n, n);
    let mut dual = DMatrix::zeros(n, n);
    let shrink = 1.0 / RHO;
    for _ in 0..MAX_ITER {
        let a = solve(&(&lg + &c * RHO - &dual));
        let v = &a + &dual / RHO;
        let mut next = v.map(|z| z.signum() * (z.abs() - shrink).max(0.0));
        for i in 0..n {
            next[(i, i)] = 0.0;
        }
        let primal = (&a - &next).amax();
        let change = (&next - &c).amax();
        dual += (&a - &next) * RHO;
        c = next;
        if primal < TOL && change < TOL {
            break;
        }
    }
    c
}

pub(crate) fn ssc(x: &DMatrix<f64>, lambda: f64, k: usize, rng: &mut BenchRng) -> Result<Vec<usize>> {
    let c = ssc_coefficients(x, lambda);
    let abs = c.abs();
    let w = &abs + abs.transpose();
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateGeometry("self-expressive affinity is identically zero".into()));
    }
    spectral_labels(&w, k, rng)
}
