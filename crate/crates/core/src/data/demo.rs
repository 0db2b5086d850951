//! Synthetic datasets so the whole pipeline runs without external data.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Dataset, Modality};
use crate::rng::{derive_seed, rng_from_seed};
use crate::Result;

/// Isotropic Gaussian blobs around `centers`; `sizes[c]` samples each.
pub fn blobs(name: &str, centers: &[Vec<f64>], sizes: &[usize], sigma: f64, seed: u64) -> Result<Dataset> {
    let mut rng = rng_from_seed(seed);
    let m = centers.first().map_or(0, Vec::len);
    let n: usize = sizes.iter().sum();
    let mut values = Vec::with_capacity(n * m);
    let mut y = Vec::with_capacity(n);
    for (c, (center, &size)) in centers.iter().zip(sizes).enumerate() {
        for _ in 0..size {
            for &mu in center {
                let z: f64 = StandardNormal.sample(&mut rng);
                values.push(mu + sigma * z);
            }
            y.push(c);
        }
    }
    Dataset::new(
        name,
        DMatrix::from_row_slice(n, m, &values),
        Some(y),
        centers.len(),
        Modality::Tabular,
    )
}

/// Two concentric noisy rings in the plane, half the samples each.
pub fn rings(name: &str, n: usize, radii: (f64, f64), noise: f64, seed: u64) -> Result<Dataset> {
    let mut rng = rng_from_seed(seed);
    let mut values = Vec::with_capacity(2 * n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let (label, r) = if i < n / 2 { (0, radii.0) } else { (1, radii.1) };
        let t = rng.random::<f64>() * 2.0 * PI;
        let e1: f64 = StandardNormal.sample(&mut rng);
        let e2: f64 = StandardNormal.sample(&mut rng);
        values.push(r * t.cos() + noise * e1);
        values.push(r * t.sin() + noise * e2);
        y.push(label);
    }
    Dataset::new(name, DMatrix::from_row_slice(n, 2, &values), Some(y), 2, Modality::Tabular)
}

/// Gaussian mixture with a shared linear shear, so clusters are elongated.
pub fn anisotropic(name: &str, centers: &[Vec<f64>], per_cluster: usize, shear: [[f64; 2]; 2], seed: u64) -> Result<Dataset> {
    let mut rng = rng_from_seed(seed);
    let n = centers.len() * per_cluster;
    let mut values = Vec::with_capacity(2 * n);
    let mut y = Vec::with_capacity(n);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_cluster {
            let z0: f64 = StandardNormal.sample(&mut rng);
            let z1: f64 = StandardNormal.sample(&mut rng);
            values.push(center[0] + shear[0][0] * z0 + shear[0][1] * z1);
            values.push(center[1] + shear[1][0] * z0 + shear[1][1] * z1);
            y.push(c);
        }
    }
    Dataset::new(
        name,
        DMatrix::from_row_slice(n, 2, &values),
        Some(y),
        centers.len(),
        Modality::Tabular,
    )
}

/// The four bundled demo datasets, roughly `n` samples each.
pub fn demo_suite(seed: u64, n: usize) -> Result<Vec<Dataset>> {
    let n = n.max(40);
    let q = n / 4;
    Ok(vec![
        blobs(
            "blobs4",
            &[vec![0.0, 0.0], vec![12.0, 0.0], vec![0.0, 12.0], vec![12.0, 12.0]],
            &[q, q, q, n - 3 * q],
            1.0,
            seed,
        )?,
        rings("rings2", n, (1.0, 3.0), 0.08, seed.wrapping_add(1))?,
        anisotropic(
            "aniso3",
            &[vec![0.0, 0.0], vec![6.0, 5.0], vec![-4.0, 8.0]],
            n / 3,
            [[1.6, -0.8], [-0.4, 0.5]],
            seed.wrapping_add(2),
        )?,
        blobs(
            "blobs3_imbalanced",
            &[vec![0.0, 0.0, 0.0], vec![8.0, 8.0, 0.0], vec![0.0, 8.0, 8.0]],
            &[n / 2, n * 3 / 10, n - n / 2 - n * 3 / 10],
            1.2,
            seed.wrapping_add(3),
        )?,
    ])
}

/// `count` demo datasets: the suite's four families repeated with fresh
/// seeds. Copies after the first set get a `_<copy>` name suffix.
pub fn demo_collection(seed: u64, n: usize, count: usize) -> Result<Vec<Dataset>> {
    let mut out = Vec::with_capacity(count);
    let mut copy = 0;
    while out.len() < count {
        let copy_seed = if copy == 0 {
            seed
        } else {
            derive_seed(seed, &["demo", &copy.to_string()])
        };
        for d in demo_suite(copy_seed, n)? {
            if out.len() == count {
                break;
            }
            out.push(if copy == 0 {
                d
            } else {
                let name = format!("{}_{copy}", d.name());
                d.with_name(name)
            });
        }
        copy += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_deterministic_and_labeled() {
        let a = demo_suite(5, 120).unwrap();
        let b = demo_suite(5, 120).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        for d in &a {
            assert!(d.labels().is_some());
            assert!(d.n() >= 100);
        }
    }

    #[test]
    fn collection_extends_the_suite() {
        let c = demo_collection(5, 60, 10).unwrap();
        assert_eq!(c.len(), 10);
        assert_eq!(c[..4], demo_suite(5, 60).unwrap()[..]);
        assert_eq!(c[4].name(), "blobs4_1");
        assert_eq!(c[9].name(), "rings2_2");
    }
}
