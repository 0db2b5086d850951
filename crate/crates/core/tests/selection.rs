use clubench::cluster::Algorithm;
use clubench::metafeat::{FeatureSpec, Manifest, MetaTable};
use clubench::metrics::Metric;
use clubench::perfmatrix::{Mask, PerformanceMatrix};
use clubench::rng::rng_from_seed;
use clubench::select::{cross_validate, CvOptions, Forest, ForestOptions, Node, SelectorModel, Strategy};
use clubench::sweep::enumerate_grid;
use nalgebra::DMatrix;
use rand::Rng;

fn traverse(nodes: &[Node], z: &[f64]) -> Vec<f64> {
    let mut i = 0;
    loop {
        match &nodes[i] {
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => i = if z[*feature] <= *threshold { *left } else { *right },
            Node::Leaf { value } => return value.clone(),
        }
    }
}

#[test]
fn prediction_is_the_mean_of_tree_leaves() {
    let mut rng = rng_from_seed(3);
    let z = DMatrix::from_fn(60, 4, |_, _| rng.random::<f64>());
    let p = DMatrix::from_fn(60, 5, |i, j| (z[(i, j % 4)] * (j + 1) as f64).sin());
    let opts = ForestOptions {
        trees: 25,
        ..Default::default()
    };
    let forest = Forest::fit(&z, &p, &Mask::full(60, 5), &opts, 9).unwrap();
    for _ in 0..3 {
        let x: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
        let mut manual = vec![0.0; 5];
        for tree in &forest.trees {
            for (m, v) in manual.iter_mut().zip(traverse(&tree.nodes, &x)) {
                *m += v;
            }
        }
        manual.iter_mut().for_each(|m| *m /= forest.trees.len() as f64);
        let got = forest.predict(&x);
        for (a, b) in got.iter().zip(&manual) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {manual:?}");
        }
    }
}

fn fixture(t: usize, seed: u64) -> (MetaTable, Manifest, [PerformanceMatrix; 3]) {
    let mut rng = rng_from_seed(seed);
    let cols: Vec<String> = [Algorithm::KMeans, Algorithm::Gmm, Algorithm::Birch]
        .iter()
        .flat_map(|&a| enumerate_grid(a).configs().iter().map(|c| c.config_id()).collect::<Vec<_>>())
        .collect();
    let h = cols.len();
    let anchors: Vec<f64> = (0..h).map(|_| rng.random::<f64>()).collect();
    let z: Vec<Vec<f64>> = (0..t).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    let names: Vec<String> = (0..t).map(|i| format!("d{i}")).collect();
    let matrices = Metric::ALL.map(|metric| {
        let values = DMatrix::from_fn(t, h, |i, j| 1.0 - (z[i][0] - anchors[j]).abs());
        let mut mask = Mask::full(t, h);
        for i in 0..t {
            if i % 3 == 0 {
                mask.set(i, (i * 5) % h, false);
            }
        }
        PerformanceMatrix::new(values, mask, names.clone(), cols.clone(), metric).unwrap()
    });
    let manifest = Manifest {
        features: ["signal", "noise"]
            .iter()
            .map(|n| FeatureSpec {
                name: n.to_string(),
                tag: "fixture".into(),
            })
            .collect(),
    };
    let meta = MetaTable {
        feature_names: vec!["signal".into(), "noise".into()],
        datasets: names,
        rows: z,
    };
    (meta, manifest, matrices)
}

#[test]
fn eub_bounds_every_choice_per_dataset() {
    let (meta, manifest, matrices) = fixture(40, 5);
    let opts = CvOptions {
        folds: 4,
        seed: 2,
        forest: ForestOptions {
            trees: 30,
            ..Default::default()
        },
    };
    let report = cross_validate(&meta, &manifest, &matrices, &opts).unwrap();
    for o in &report.outcomes {
        let eub = report
            .outcomes
            .iter()
            .find(|e| e.strategy == Strategy::Eub && e.dataset == o.dataset && e.metric == o.metric)
            .unwrap();
        assert!(o.realized <= eub.realized, "{o:?} beats {eub:?}");
    }
    let e = report.strategies.iter().position(|&s| s == Strategy::Eub).unwrap();
    for fold in &report.fold_scores {
        for s in fold {
            for m in 0..3 {
                assert!(fold[e][m] >= s[m]);
            }
        }
    }
    assert_eq!(report.outcomes.len(), 40 * 3 * report.strategies.len());
}

#[test]
fn cross_validation_is_deterministic() {
    let (meta, manifest, matrices) = fixture(30, 8);
    let opts = CvOptions {
        folds: 3,
        seed: 4,
        forest: ForestOptions {
            trees: 10,
            ..Default::default()
        },
    };
    let a = cross_validate(&meta, &manifest, &matrices, &opts).unwrap();
    let b = cross_validate(&meta, &manifest, &matrices, &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn saved_model_predicts_identically() {
    let (meta, manifest, matrices) = fixture(30, 1);
    let z = DMatrix::from_fn(30, 2, |i, j| meta.rows[i][j]);
    let opts = ForestOptions {
        trees: 12,
        ..Default::default()
    };
    let model = SelectorModel::fit(&z, manifest, &matrices[0], opts, 6).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("selector.json");
    std::fs::write(&path, model.to_json().unwrap()).unwrap();
    let loaded = SelectorModel::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for row in &meta.rows {
        assert_eq!(model.predict_values(row).unwrap(), loaded.predict_values(row).unwrap());
    }
    assert!(loaded.predict_values(&[0.1]).is_err());
}
