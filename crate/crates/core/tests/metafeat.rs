use clubench::data::{blobs, preprocess};
use clubench::metafeat::{meta_vector, normal_test_p, statistical_features};

// Reference p-values from an independent implementation of the
// D'Agostino-Pearson omnibus test on the same samples.
#[test]
fn normal_test_matches_reference_values() {
    let xs: Vec<f64> = (0..30).map(|i| ((i * 7) % 13) as f64 * 0.5 + (i as f64).sin()).collect();
    let ys: Vec<f64> = (0..25).map(|i| (i as f64 / 10.0).exp()).collect();
    let zs: Vec<f64> = (0..12).map(|i| (i % 5) as f64 + 0.1 * i as f64).collect();
    let cases = [(xs, 0.04017841537488008), (ys, 0.16821199056700809), (zs, 0.6454449001593546)];
    for (sample, expected) in cases {
        let p = normal_test_p(&sample).unwrap();
        assert!((p - expected).abs() < 1e-9, "{p} vs {expected}");
    }
}

#[test]
fn meta_vector_has_no_nan_and_matches_manifest() {
    let d = blobs("b", &[vec![0.0, 0.0, 0.0, 0.0], vec![4.0, 4.0, 0.0, 1.0]], &[25, 30], 1.5, 8).unwrap();
    for standardize in [false, true] {
        let d = preprocess(&d, standardize, 10_000, 0).unwrap();
        let mv = meta_vector(&d, 3).unwrap();
        assert_eq!(mv.len(), mv.manifest().len());
        assert_eq!(mv.len(), 76 + 130);
        assert!(mv.values().iter().all(|v| v.is_finite()));
    }
}

#[test]
fn statistical_block_is_seed_stable_on_well_separated_data() {
    let d = blobs("s", &[vec![0.0, 0.0], vec![50.0, 50.0]], &[20, 20], 0.5, 1).unwrap();
    let a = statistical_features(&d, 1).unwrap();
    let b = statistical_features(&d, 2).unwrap();
    // the two-cluster grouping is the same for any seed here
    assert_eq!(a, b);
}
