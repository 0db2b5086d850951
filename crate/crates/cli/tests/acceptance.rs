//! End-to-end acceptance suite. Runs every criterion, prints one
//! `PASS`/`FAIL`/`SKIPPED` line each and exits non-zero on any failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use clubench::cluster::{fit_predict, Algorithm, AlgorithmConfig};
use clubench::data::{blobs, rings, Dataset, Modality};
use clubench::metafeat::{meta_vector, FeatureSpec, Manifest, MetaTable};
use clubench::metrics::{ari, clustering_accuracy, nmi, Metric};
use clubench::perfmatrix::{
    ccr, complete, completion_experiment, mcar_mask, ranks_and_tests, read_matrix, CompletionOptions, Mask, PerformanceMatrix,
};
use clubench::rng::{derive_seed, rng_from_seed};
use clubench::select::{cross_validate, CvOptions, ForestOptions, Strategy};
use clubench::sweep::{all_grids, enumerate_grid};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

enum Verdict {
    Pass(String),
    Fail(String),
    Skipped(String),
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn within_budget(v: Verdict, elapsed: Duration, budget: Option<f64>) -> Verdict {
    match (v, budget) {
        (Verdict::Pass(d), Some(b)) if elapsed.as_secs_f64() >= b => {
            Verdict::Fail(format!("{d}; runtime {:.2}s over the {b}s budget", elapsed.as_secs_f64()))
        }
        (v, _) => v,
    }
}

fn grid_fidelity() -> Verdict {
    let expected = [
        (Algorithm::KMeans, 6),
        (Algorithm::KernelKMeans, 10),
        (Algorithm::AggClu, 9),
        (Algorithm::Dbscan, 90),
        (Algorithm::Birch, 12),
        (Algorithm::Gmm, 6),
        (Algorithm::SpeClu, 11),
        (Algorithm::MeanShift, 12),
        (Algorithm::Kpc, 5),
        (Algorithm::Ssc, 5),
    ];
    let mut bad = Vec::new();
    for (algo, want) in expected {
        let got = enumerate_grid(algo).len();
        if got != want {
            bad.push(format!("{algo}: {got} != {want}"));
        }
    }
    let total: usize = all_grids().iter().map(|g| g.len()).sum();
    check(bad.is_empty() && total == 166, format!("total {total} {bad:?}"))
}

fn distinct(xs: &[usize]) -> Vec<usize> {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Largest number of correctly labelled samples over every injective map
/// from predicted clusters to true classes (a cluster may also map nowhere).
fn brute_force_matches(y_true: &[usize], y_pred: &[usize]) -> usize {
    fn go(
        k: usize,
        clusters: &[usize],
        classes: &[usize],
        used: &mut Vec<bool>,
        map: &mut BTreeMap<usize, usize>,
        yt: &[usize],
        yp: &[usize],
    ) -> usize {
        if k == clusters.len() {
            return yt.iter().zip(yp).filter(|(t, p)| map.get(p) == Some(t)).count();
        }
        map.remove(&clusters[k]);
        let mut best = go(k + 1, clusters, classes, used, map, yt, yp);
        for (ci, &class) in classes.iter().enumerate() {
            if !used[ci] {
                used[ci] = true;
                map.insert(clusters[k], class);
                best = best.max(go(k + 1, clusters, classes, used, map, yt, yp));
                map.remove(&clusters[k]);
                used[ci] = false;
            }
        }
        best
    }
    let clusters = distinct(y_pred);
    let classes = distinct(y_true);
    go(
        0,
        &clusters,
        &classes,
        &mut vec![false; classes.len()],
        &mut BTreeMap::new(),
        y_true,
        y_pred,
    )
}

fn pair_counting_ari(a: &[usize], b: &[usize]) -> f64 {
    let (mut ss, mut sd, mut ds, mut dd) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => ss += 1.0,
                (true, false) => sd += 1.0,
                (false, true) => ds += 1.0,
                (false, false) => dd += 1.0,
            }
        }
    }
    if sd == 0.0 && ds == 0.0 {
        return 1.0;
    }
    2.0 * (ss * dd - sd * ds) / ((ss + sd) * (sd + dd) + (ss + ds) * (ds + dd))
}

fn contingency_nmi(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let (ua, ub) = (distinct(a), distinct(b));
    let count = |f: &dyn Fn(usize) -> bool| (0..a.len()).filter(|&i| f(i)).count() as f64;
    let h = |labels: &[usize], of: &[usize]| -> f64 {
        labels
            .iter()
            .map(|&l| {
                let p = count(&|i| of[i] == l) / n;
                -p * p.ln()
            })
            .sum()
    };
    let mut mi = 0.0;
    for &x in &ua {
        for &y in &ub {
            let nxy = count(&|i| a[i] == x && b[i] == y);
            if nxy > 0.0 {
                let nx = count(&|i| a[i] == x);
                let ny = count(&|i| b[i] == y);
                mi += nxy / n * (n * nxy / (nx * ny)).ln();
            }
        }
    }
    if ua.len() < 2 || ub.len() < 2 {
        return 0.0;
    }
    mi / (0.5 * (h(&ua, a) + h(&ub, b)))
}

fn metric_oracles() -> Verdict {
    let mut rng = rng_from_seed(derive_seed(2, &["acceptance", "metrics"]));
    let mut worst = (0.0f64, 0.0f64);
    let mut acc_mismatch = 0;
    for _ in 0..500 {
        let n = rng.random_range(2..=8);
        let (kt, kp) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let yt: Vec<usize> = (0..n).map(|_| rng.random_range(0..kt)).collect();
        let yp: Vec<usize> = (0..n).map(|_| rng.random_range(0..kp)).collect();
        let acc = clustering_accuracy(&yt, &yp).unwrap();
        if acc != brute_force_matches(&yt, &yp) as f64 / n as f64 {
            acc_mismatch += 1;
        }
        worst.0 = worst.0.max((ari(&yt, &yp).unwrap() - pair_counting_ari(&yt, &yp)).abs());
        worst.1 = worst.1.max((nmi(&yt, &yp).unwrap() - contingency_nmi(&yt, &yp)).abs());
    }
    check(
        acc_mismatch == 0 && worst.0 <= 1e-12 && worst.1 <= 1e-12,
        format!(
            "acc mismatches {acc_mismatch}, max |dARI| {:.1e}, max |dNMI| {:.1e}",
            worst.0, worst.1
        ),
    )
}

fn config(algo: Algorithm, pairs: &[(&str, &str)], k: usize) -> AlgorithmConfig {
    AlgorithmConfig::from_pairs(algo, pairs).unwrap().with_k(k)
}

fn recovery() -> Verdict {
    let blob_configs = [
        config(
            Algorithm::KMeans,
            &[("init", "kmeans++"), ("metric", "euclidean"), ("n_init", "10"), ("max_iter", "500")],
            4,
        ),
        config(Algorithm::Gmm, &[("covariance_type", "full"), ("init_params", "kmeans")], 4),
        config(Algorithm::AggClu, &[("metric", "euclidean"), ("linkage", "average")], 4),
        config(Algorithm::SpeClu, &[("affinity", "knn"), ("k", "10")], 4),
        config(Algorithm::Birch, &[("threshold", "0.5"), ("branching_factor", "50")], 4),
    ];
    let centers = vec![vec![0.0, 0.0], vec![12.0, 0.0], vec![0.0, 12.0], vec![12.0, 12.0]];
    let mut notes = Vec::new();
    let mut ok = true;
    for cfg in &blob_configs {
        let perfect = (0..5u64)
            .into_par_iter()
            .filter(|&s| {
                let d = blobs("blobs", &centers, &[100; 4], 1.0, s).unwrap();
                let labels = fit_predict(cfg, d.x(), s).unwrap();
                clustering_accuracy(d.labels().unwrap(), &labels).unwrap() == 1.0
            })
            .count();
        ok &= perfect >= 4;
        notes.push(format!("{} {perfect}/5", cfg.algorithm()));
    }
    let speclu = config(Algorithm::SpeClu, &[("affinity", "knn"), ("k", "10")], 2);
    let kmeans = config(
        Algorithm::KMeans,
        &[("init", "kmeans++"), ("metric", "euclidean"), ("n_init", "10"), ("max_iter", "500")],
        2,
    );
    let r = rings("rings", 400, (1.0, 4.0), 0.1, 0).unwrap();
    let acc_of = |cfg: &AlgorithmConfig| clustering_accuracy(r.labels().unwrap(), &fit_predict(cfg, r.x(), 0).unwrap()).unwrap();
    let (s_acc, k_acc) = (acc_of(&speclu), acc_of(&kmeans));
    ok &= s_acc == 1.0 && k_acc <= 0.8;
    notes.push(format!("rings SpeClu {s_acc:.3} KMeans {k_acc:.3}"));
    check(ok, notes.join(", "))
}

/// Product of seeded uniform rank-20 factors divided by its maximum, so
/// entries lie in (0, 1] and the rank stays exactly 20.
fn rank20_matrix() -> DMatrix<f64> {
    let mut rng = rng_from_seed(derive_seed(4, &["acceptance", "rank20"]));
    let u = DMatrix::from_fn(131, 20, |_, _| rng.random::<f64>());
    let v = DMatrix::from_fn(273, 20, |_, _| rng.random::<f64>());
    let p = u * v.transpose();
    let max = p.max();
    p / max
}

fn completion() -> Verdict {
    let p = rank20_matrix();
    let opts = CompletionOptions {
        rank: 20,
        ..Default::default()
    };
    let seeds: Vec<u64> = (0..5).collect();
    let mrs = [0.5, 0.6, 0.7, 0.8, 0.9];
    let means: Vec<f64> = mrs
        .par_iter()
        .map(|&mr| completion_experiment(&p, Metric::Acc, mr, &seeds, &opts).unwrap().mape_mean)
        .collect();
    let monotone = means.windows(2).all(|w| w[1] >= w[0]);
    let mask = mcar_mask(&Mask::full(131, 273), 0.5, 0).unwrap();
    let fit = complete(&p, &mask, &opts).unwrap();
    let objective_ok = fit.trace.windows(2).all(|w| w[1] <= w[0]);
    check(
        means[0] <= 0.05 && monotone && objective_ok,
        format!("MAPE by mr {means:.4?}, objective non-increasing {objective_ok}"),
    )
}

fn spectrum() -> Verdict {
    let p = rank20_matrix();
    let c20 = ccr(&p, 20).unwrap();
    let full = ccr(&p, 131).unwrap();
    let diag = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
    let c1 = ccr(&diag, 1).unwrap();
    check(
        c20 >= 0.999 && (full - 1.0).abs() <= 1e-12 && c1 == 0.75,
        format!("ccr(20) {c20:.6}, ccr(full) {full}, ccr(1) on diag(3,1) {c1}"),
    )
}

fn degenerate_datasets() -> Vec<Dataset> {
    let mut out = Vec::new();
    let mut rng = rng_from_seed(derive_seed(6, &["acceptance", "degenerate"]));
    for i in 0..50 {
        let (n, m) = match i % 5 {
            0 => (3, 1 + i % 4),
            1 => (4, 2),
            _ => (10 + i, 1 + i % 6),
        };
        let x = match i % 5 {
            // every column constant
            0 | 2 => DMatrix::from_fn(n, m, |_, j| j as f64 * (i as f64 - 7.0)),
            // all rows identical
            1 | 3 => {
                let row: Vec<f64> = (0..m).map(|_| rng.random_range(-5.0..5.0)).collect();
                DMatrix::from_fn(n, m, |_, j| row[j])
            }
            // two duplicated points plus one constant column
            _ => DMatrix::from_fn(n, m, |r, j| if j == 0 { 1.0 } else { (r % 2) as f64 * 1e-300 }),
        };
        let k = if n > 2 { 2 } else { 1 };
        out.push(Dataset::new(format!("degenerate_{i}"), x, None, k, Modality::Tabular).unwrap());
    }
    out
}

fn meta_features() -> Verdict {
    let sets = degenerate_datasets();
    let results: Vec<(usize, usize, usize, bool)> = sets
        .par_iter()
        .map(|d| {
            let v = meta_vector(d, 0).unwrap();
            let landmark = v.manifest().features.iter().filter(|f| f.tag.starts_with("landmark")).count();
            (v.len(), v.manifest().len(), landmark, v.values().iter().all(|x| x.is_finite()))
        })
        .collect();
    let bad = results
        .iter()
        .filter(|(len, mlen, lm, finite)| len != mlen || *lm != 130 || !finite)
        .count();
    let (len, _, lm, _) = results[0];
    check(
        bad == 0,
        format!("{} datasets, length {len}, landmark block {lm}, {bad} bad", sets.len()),
    )
}

fn selection() -> Verdict {
    let (t, h, noise) = (200, 50, 3);
    let mut rng = rng_from_seed(derive_seed(7, &["acceptance", "selection"]));
    let col_names: Vec<String> = all_grids()
        .iter()
        .flat_map(|g| g.configs().iter().map(|c| c.config_id()).collect::<Vec<_>>())
        .take(h)
        .collect();
    let anchors: Vec<[f64; 3]> = (0..h).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
    let z: Vec<Vec<f64>> = (0..t).map(|_| (0..3 + noise).map(|_| rng.random::<f64>()).collect()).collect();
    let score = |i: usize, j: usize| {
        let d: f64 = (0..3).map(|c| (z[i][c] - anchors[j][c]).powi(2)).sum::<f64>().sqrt();
        1.0 - d / 3f64.sqrt()
    };
    let names: Vec<String> = (0..t).map(|i| format!("d{i:03}")).collect();
    let p = DMatrix::from_fn(t, h, score);
    let matrices = Metric::ALL.map(|metric| PerformanceMatrix::dense(p.clone(), names.clone(), col_names.clone(), metric).unwrap());
    let manifest = Manifest {
        features: (0..3 + noise)
            .map(|c| FeatureSpec {
                name: format!("f{c}"),
                tag: "fixture".into(),
            })
            .collect(),
    };
    let meta = MetaTable {
        feature_names: manifest.names().iter().map(|s| s.to_string()).collect(),
        datasets: names.clone(),
        rows: z.clone(),
    };
    let opts = CvOptions {
        folds: 5,
        seed: 7,
        forest: ForestOptions::default(),
    };
    let report = cross_validate(&meta, &manifest, &matrices, &opts).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for metric in Metric::ALL {
        let reg = report.score(Strategy::Regressor, metric).unwrap();
        let eub = report.score(Strategy::Eub, metric).unwrap();
        ok &= reg >= 0.95 * eub;
        notes.push(format!("{metric} {:.4}/{:.4}", reg, eub));
    }
    let eub_at = report.strategies.iter().position(|&s| s == Strategy::Eub).unwrap();
    let dominated = report
        .fold_scores
        .iter()
        .all(|fold| fold.iter().all(|s| (0..3).all(|m| fold[eub_at][m] >= s[m])));
    ok &= dominated;
    check(
        ok,
        format!("regressor/EUB {}, EUB dominates every fold {dominated}", notes.join(" ")),
    )
}

fn ranking() -> Verdict {
    let (n, m) = (30, 6);
    let mut rng = rng_from_seed(derive_seed(8, &["acceptance", "ranking"]));
    let mut p = DMatrix::from_fn(n, m, |_, _| (rng.random_range(0..6) as f64) / 10.0);
    for i in 0..n {
        let best = (1..m).map(|j| p[(i, j)]).fold(f64::MIN, f64::max);
        p[(i, 0)] = best + 0.05 + 0.3 * rng.random::<f64>();
    }
    let r = ranks_and_tests(&p).unwrap();
    let sum: f64 = r.average_ranks.iter().sum();
    let expected = (m * (m + 1)) as f64 / 2.0;
    let max_p = (1..m).map(|j| r.p_values[0][j]).fold(0.0, f64::max);
    check(
        (sum - expected).abs() < 1e-9 && r.average_ranks[0] == 1.0 && max_p < 0.05,
        format!(
            "rank sum {sum} (want {expected}), dominating rank {}, max p {max_p:.2e}",
            r.average_ranks[0]
        ),
    )
}

fn run_pipeline(bin: &Path, root: &Path, workers: usize) -> Result<(), String> {
    let p = |s: &str| root.join(s).to_string_lossy().into_owned();
    let w = workers.to_string();
    let steps: Vec<Vec<String>> = vec![
        vec![
            "demo".into(),
            "--out".into(),
            p("data"),
            "--n".into(),
            "60".into(),
            "--count".into(),
            "10".into(),
        ],
        vec![
            "sweep".into(),
            "--data".into(),
            p("data"),
            "--out".into(),
            p("sweep"),
            "--algos".into(),
            "KMeans,GMM,DBSCAN".into(),
            "--repeats".into(),
            "2".into(),
        ],
        vec![
            "matrix".into(),
            "--results".into(),
            p("sweep/results.csv"),
            "--metric".into(),
            "acc".into(),
            "--out".into(),
            p("mx"),
        ],
        vec![
            "matrix".into(),
            "--results".into(),
            p("sweep/results.csv"),
            "--metric".into(),
            "nmi".into(),
            "--out".into(),
            p("mx"),
        ],
        vec![
            "matrix".into(),
            "--results".into(),
            p("sweep/results.csv"),
            "--metric".into(),
            "ari".into(),
            "--out".into(),
            p("mx"),
        ],
        vec![
            "complete".into(),
            "--matrix".into(),
            p("mx/matrix_acc.csv"),
            "--mr".into(),
            "0.3".into(),
            "--rank".into(),
            "3".into(),
            "--seeds".into(),
            "2".into(),
            "--out".into(),
            p("cmp"),
        ],
        vec!["metafeat".into(), "--data".into(), p("data"), "--out".into(), p("mf")],
        vec![
            "select".into(),
            "--meta".into(),
            p("mf/meta.csv"),
            "--matrices".into(),
            format!("{},{},{}", p("mx/matrix_acc.csv"), p("mx/matrix_nmi.csv"), p("mx/matrix_ari.csv")),
            "--trees".into(),
            "20".into(),
            "--out".into(),
            p("sel"),
        ],
    ];
    for args in steps {
        let out = Command::new(bin)
            .args(&args)
            .args(["--workers", &w])
            .env("CLUBENCH_SEED", "11")
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{} failed: {}", args[0], String::from_utf8_lossy(&out.stderr)));
        }
    }
    Ok(())
}

fn output_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if !path.to_string_lossy().ends_with(".timing.csv") {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                files.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn determinism() -> Verdict {
    let bin = Path::new(env!("CARGO_BIN_EXE_clubench"));
    let tmp = tempfile::tempdir().unwrap();
    let mut snapshots = Vec::new();
    for (run, workers) in [(0, 1), (1, 1), (2, 8)] {
        let root = tmp.path().join(format!("run{run}"));
        if let Err(e) = run_pipeline(bin, &root, workers) {
            return Verdict::Fail(e);
        }
        snapshots.push(output_files(&root));
    }
    let files = snapshots[0].len();
    let differing: Vec<String> = snapshots[0]
        .iter()
        .filter(|(k, v)| snapshots[1..].iter().any(|s| s.get(*k) != Some(*v)))
        .map(|(k, _)| k.display().to_string())
        .collect();
    let same_sets = snapshots[1..].iter().all(|s| s.len() == files);
    check(
        differing.is_empty() && same_sets && files > 0,
        format!("{files} files compared over 2 runs and workers 1/8, differing {differing:?}"),
    )
}

fn real_matrix_hooks() -> Verdict {
    let Ok(path) = std::env::var("CLUBENCH_REAL_ACC_MATRIX") else {
        return Verdict::Skipped("set CLUBENCH_REAL_ACC_MATRIX to a dense ACC matrix CSV".into());
    };
    let file = match std::fs::File::open(&path) {
        Ok(f) => f,
        Err(e) => return Verdict::Fail(format!("{path}: {e}")),
    };
    let pm = match read_matrix(file, Metric::Acc) {
        Ok(pm) => pm.complete_rows(),
        Err(e) => return Verdict::Fail(format!("{path}: {e}")),
    };
    let p = pm.values();
    let j = 60.min(p.nrows().min(p.ncols()));
    let c = ccr(p, j).unwrap();
    let opts = CompletionOptions {
        rank: 60.min(p.nrows().min(p.ncols())),
        ..Default::default()
    };
    let report = completion_experiment(p, Metric::Acc, 0.5, &[0, 1, 2, 3, 4], &opts).unwrap();
    let m = report.mape_mean;
    check(
        c > 0.90 && (m - 0.1191).abs() <= 0.03,
        format!("ccr({j}) {c:.4}, MAPE at mr=0.5 {m:.4}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict, Option<f64>); 10] = [
        ("grid fidelity", grid_fidelity, Some(1.0)),
        ("metric oracles", metric_oracles, Some(10.0)),
        ("recovery on synthetic geometry", recovery, Some(30.0)),
        ("completion", completion, Some(60.0)),
        ("spectrum", spectrum, None),
        ("meta-features", meta_features, Some(60.0)),
        ("selection protocol", selection, Some(120.0)),
        ("ranking", ranking, None),
        ("determinism", determinism, None),
        ("real-matrix hooks", real_matrix_hooks, None),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = within_budget(run(), start.elapsed(), *budget);
        let secs = start.elapsed().as_secs_f64();
        let (label, detail) = match verdict {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skipped(d) => ("SKIPPED", d),
        };
        println!("criterion {:>2} {name}: {label} ({secs:.2}s) {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
