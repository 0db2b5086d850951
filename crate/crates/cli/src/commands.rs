use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clubench::cluster::Algorithm;
use clubench::data::{self, group_assign, imbalance_stats, Dataset, Level};
use clubench::metafeat::{self, read_manifest_json, read_meta_csv, MetaVector};
use clubench::metrics::Metric;
use clubench::perfmatrix::{self, PerformanceMatrix};
use clubench::rng::derive_seed;
use clubench::select::{cross_validate, write_cv_report, CvOptions, ForestOptions, SelectorModel};
use clubench::sweep::{self, Grid, RunResult, SweepManifest, SweepOptions};
use clubench::Error;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{
    CcrArgs, CliError, Command, CompleteArgs, DemoArgs, GroupBy, MatrixArgs, MetafeatArgs, PrepArgs, ReportArgs, SelectArgs, SummarizeArgs,
    SweepArgs,
};

type CmdResult = Result<Value, CliError>;

pub fn run(cmd: Command, workers: Option<usize>) -> (&'static str, CmdResult) {
    match cmd {
        Command::Demo(a) => ("demo", demo(a)),
        Command::Sweep(a) => ("sweep", run_sweep(a, workers)),
        Command::Summarize(a) => ("summarize", summarize(a)),
        Command::Matrix(a) => ("matrix", matrix(a)),
        Command::Ccr(a) => ("ccr", ccr(a)),
        Command::Complete(a) => ("complete", complete(a)),
        Command::Metafeat(a) => ("metafeat", metafeat(a)),
        Command::Select(a) => ("select", select(a)),
        Command::Report(a) => ("report", report(a)),
    }
}

fn out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    Ok(fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

fn open(path: &Path) -> Result<File, CliError> {
    Ok(File::open(path).map_err(|e| Error::io(path, e))?)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(Error::from)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn display(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

fn load_prepared(dir: &Path, prep: &PrepArgs, seed: u64) -> Result<Vec<Dataset>, CliError> {
    let raw = data::load_dir(dir)?;
    Ok(raw
        .iter()
        .map(|d| data::preprocess(d, !prep.no_standardize, prep.cap, derive_seed(seed, &["subsample", d.name()])))
        .collect::<clubench::Result<_>>()?)
}

/// Built-in grids with any overrides from `path` swapped in.
fn grids(path: Option<&Path>) -> Result<Vec<Grid>, CliError> {
    let overrides = match path {
        Some(p) => sweep::parse_grids_json(&read_text(p)?)?,
        None => Vec::new(),
    };
    Ok(Algorithm::ALL
        .iter()
        .map(|&a| {
            overrides
                .iter()
                .find(|g| g.algorithm() == a)
                .cloned()
                .unwrap_or_else(|| sweep::enumerate_grid(a))
        })
        .collect())
}

fn parse_algos(list: &str) -> Result<BTreeSet<Algorithm>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Algorithm>().map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

fn demo(a: DemoArgs) -> CmdResult {
    out_dir(&a.out)?;
    let sets = data::demo_collection(a.seed.seed, a.n, a.count as usize)?;
    let mut written = Vec::new();
    for d in &sets {
        written.push(data::write_csv(d, &a.out)?);
    }
    Ok(json!({"datasets": sets.len(), "outputs": display(&written)}))
}

fn run_sweep(a: SweepArgs, workers: Option<usize>) -> CmdResult {
    let selected = a.algos.as_deref().map(parse_algos).transpose()?;
    if selected.as_ref().is_some_and(BTreeSet::is_empty) {
        return Err(CliError::Usage("--algos names no algorithm".into()));
    }
    let grids: Vec<Grid> = grids(a.grid.as_deref())?
        .into_iter()
        .filter(|g| selected.as_ref().is_none_or(|s| s.contains(&g.algorithm())))
        .collect();
    let datasets = load_prepared(&a.data, &a.prep, a.seed.seed)?;
    let opts = SweepOptions {
        repeats: a.repeats,
        base_seed: a.seed.seed,
        workers: workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from)),
    };
    let results = sweep::run_sweep(&datasets, &grids, &opts)?;
    out_dir(&a.out)?;

    let results_path = a.out.join("results.csv");
    let mut w = create(&results_path)?;
    sweep::write_results(&mut w, &results, a.inline_timing)?;
    w.flush().map_err(|e| Error::io(&results_path, e))?;
    let mut outputs = vec![results_path];
    if !a.inline_timing {
        let p = a.out.join("results.timing.csv");
        let mut w = create(&p)?;
        sweep::write_timings(&mut w, &results)?;
        w.flush().map_err(|e| Error::io(&p, e))?;
        outputs.push(p);
    }
    let manifest = SweepManifest {
        base_seed: a.seed.seed,
        repeats: a.repeats,
        reducer: a.reducer,
        datasets: datasets.iter().map(|d| d.name().to_owned()).collect(),
        configs: grids.iter().map(Grid::len).sum(),
        scale_units: Default::default(),
    };
    let mp = a.out.join("sweep_manifest.json");
    write_json(&mp, &manifest)?;
    outputs.push(mp);
    let failed = results.iter().filter(|r| r.error.is_some()).count();
    Ok(json!({"rows": results.len(), "failed_cells": failed, "outputs": display(&outputs)}))
}

fn summarize(a: SummarizeArgs) -> CmdResult {
    let results = sweep::read_results_file(&a.results)?;
    let rows = sweep::summarize(&results, &grids(a.grid.as_deref())?, a.reducer)?;
    out_dir(&a.out)?;
    let p = a.out.join("summary.csv");
    let mut w = create(&p)?;
    sweep::write_summary(&mut w, &rows)?;
    Ok(json!({"algorithms": rows.len(), "outputs": display(&[p])}))
}

fn matrix(a: MatrixArgs) -> CmdResult {
    let results = sweep::read_results_file(&a.results)?;
    let pm = perfmatrix::build_matrix_with(&results, a.metric, a.reducer)?;
    out_dir(&a.out)?;
    let p = a.out.join(format!("matrix_{}.csv", a.metric.as_str()));
    let mut w = create(&p)?;
    perfmatrix::write_matrix(&mut w, &pm)?;
    let (rows, cols) = pm.shape();
    Ok(json!({"rows": rows, "cols": cols, "observed": pm.mask().count(), "outputs": display(&[p])}))
}

fn read_matrix_file(path: &Path, metric: Metric) -> Result<PerformanceMatrix, CliError> {
    Ok(perfmatrix::read_matrix(open(path)?, metric)?)
}

fn ccr(a: CcrArgs) -> CmdResult {
    let pm = read_matrix_file(&a.matrix, a.metric)?;
    let value = perfmatrix::ccr(pm.require_dense()?, a.j as usize)?;
    let body = json!({"j": a.j, "ccr": value});
    let mut out = body.clone();
    if let Some(dir) = &a.out {
        out_dir(dir)?;
        let p = dir.join("ccr.json");
        write_json(&p, &body)?;
        out["outputs"] = json!(display(&[p]));
    }
    Ok(out)
}

fn complete(a: CompleteArgs) -> CmdResult {
    let pm = read_matrix_file(&a.matrix, a.metric)?;
    let p = pm.require_dense()?;
    let limit = p.nrows().min(p.ncols());
    let rank = (a.rank as usize).min(limit);
    if rank < a.rank as usize {
        log::warn!("rank {} exceeds the matrix's smaller side; using {rank}", a.rank);
    }
    let seeds: Vec<u64> = (0..a.seeds).map(|i| derive_seed(a.seed.seed, &["mask", &i.to_string()])).collect();
    let opts = perfmatrix::CompletionOptions {
        rank,
        iters: a.iters,
        ..Default::default()
    };
    let report = perfmatrix::completion_experiment(p, a.metric, a.mr, &seeds, &opts)?;
    out_dir(&a.out)?;
    let path = a.out.join("completion.json");
    write_json(&path, &report)?;
    Ok(json!({"r": report.r, "mr": report.mr, "mape_mean": report.mape_mean, "mape_std": report.mape_std, "outputs": display(&[path])}))
}

fn metafeat(a: MetafeatArgs) -> CmdResult {
    let datasets = load_prepared(&a.data, &a.prep, a.seed.seed)?;
    let vectors: Vec<(String, MetaVector)> = datasets
        .par_iter()
        .map(|d| Ok((d.name().to_owned(), metafeat::meta_vector(d, a.seed.seed)?)))
        .collect::<clubench::Result<_>>()?;
    out_dir(&a.out)?;
    let meta_path = a.out.join("meta.csv");
    let mut w = create(&meta_path)?;
    metafeat::write_meta_csv(&mut w, &vectors)?;
    w.flush().map_err(|e| Error::io(&meta_path, e))?;
    let manifest_path = a.out.join("meta_manifest.json");
    let mut w = create(&manifest_path)?;
    metafeat::write_manifest_json(&mut w, vectors[0].1.manifest())?;
    w.flush().map_err(|e| Error::io(&manifest_path, e))?;
    let imputed: Vec<Value> = vectors
        .iter()
        .map(|(name, mv)| json!({"dataset": name, "imputed": mv.imputed_names()}))
        .collect();
    let imputed_path = a.out.join("meta_imputed.json");
    write_json(&imputed_path, &imputed)?;
    Ok(json!({
        "datasets": vectors.len(),
        "features": vectors[0].1.len(),
        "outputs": display(&[meta_path, manifest_path, imputed_path]),
    }))
}

fn select(a: SelectArgs) -> CmdResult {
    if a.folds < 2 {
        return Err(CliError::Usage("--folds must be at least 2".into()));
    }
    if a.matrices.len() != 3 {
        return Err(CliError::Usage("--matrices takes the ACC, NMI and ARI matrix files".into()));
    }
    let manifest_path = a
        .manifest
        .clone()
        .unwrap_or_else(|| a.meta.parent().unwrap_or(Path::new(".")).join("meta_manifest.json"));
    let manifest = read_manifest_json(open(&manifest_path)?)?;
    let meta = read_meta_csv(open(&a.meta)?)?;
    let matrices = [
        read_matrix_file(&a.matrices[0], Metric::Acc)?,
        read_matrix_file(&a.matrices[1], Metric::Nmi)?,
        read_matrix_file(&a.matrices[2], Metric::Ari)?,
    ];
    let forest = ForestOptions {
        trees: a.trees as usize,
        ..Default::default()
    };
    let opts = CvOptions {
        folds: a.folds,
        seed: a.seed.seed,
        forest: forest.clone(),
    };
    let report = cross_validate(&meta, &manifest, &matrices, &opts)?;
    out_dir(&a.out)?;
    let mut outputs = Vec::new();

    let p = a.out.join("cv.csv");
    let mut w = create(&p)?;
    write_cv_report(&mut w, &report)?;
    w.flush().map_err(|e| Error::io(&p, e))?;
    outputs.push(p);

    let p = a.out.join("cv_folds.csv");
    let mut w = csv::Writer::from_writer(create(&p)?);
    w.write_record(["fold", "strategy", "acc", "nmi", "ari"]).map_err(Error::from)?;
    for (k, per) in report.fold_scores.iter().enumerate() {
        for (s, row) in report.strategies.iter().zip(per) {
            let mut rec = vec![k.to_string(), s.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(Error::from)?;
        }
    }
    w.flush().map_err(|e| Error::io(&p, e))?;
    outputs.push(p);

    let p = a.out.join("cv_outcomes.csv");
    let mut w = csv::Writer::from_writer(create(&p)?);
    w.write_record(["dataset", "strategy", "metric", "config_id", "realized"])
        .map_err(Error::from)?;
    for o in &report.outcomes {
        w.write_record([
            o.dataset.clone(),
            o.strategy.to_string(),
            o.metric.to_string(),
            o.config_id.clone(),
            o.realized.to_string(),
        ])
        .map_err(Error::from)?;
    }
    w.flush().map_err(|e| Error::io(&p, e))?;
    outputs.push(p);

    // selectors trained on every dataset, for use on new data
    let rows: Vec<&[f64]> = matrices[0]
        .row_names()
        .iter()
        .map(|d| {
            meta.row(d)
                .ok_or_else(|| Error::invalid(format!("dataset {d} has no meta-features")))
        })
        .collect::<clubench::Result<_>>()?;
    let z = nalgebra::DMatrix::from_fn(rows.len(), manifest.len(), |i, j| rows[i][j]);
    for pm in &matrices {
        let seed = derive_seed(a.seed.seed, &["final", pm.metric().as_str()]);
        let model = SelectorModel::fit(&z, manifest.clone(), pm, forest.clone(), seed)?;
        let p = a.out.join(format!("selector_{}.json", pm.metric().as_str()));
        fs::write(&p, model.to_json()? + "\n").map_err(|e| Error::io(&p, e))?;
        outputs.push(p);
    }

    let scores: BTreeMap<String, [f64; 3]> = report
        .strategies
        .iter()
        .map(|s| s.to_string())
        .zip(report.scores.iter().copied())
        .collect();
    Ok(json!({"datasets": meta.datasets.len(), "folds": a.folds, "scores": scores, "outputs": display(&outputs)}))
}

fn group_key(d: &Dataset, by: GroupBy) -> Option<String> {
    match by {
        GroupBy::Modality => Some(d.modality().to_string()),
        GroupBy::Dim => Some(Level::from_dimension(d.m()).to_string()),
        GroupBy::Ir => {
            let stats = imbalance_stats(d.labels()?).ok()?;
            Some(group_assign(d, &stats).ir_group.to_string())
        }
    }
}

fn report(a: ReportArgs) -> CmdResult {
    let results = sweep::read_results_file(&a.results)?;
    let datasets = data::load_dir(&a.data)?;
    let grids = grids(a.grid.as_deref())?;
    let present: BTreeSet<&str> = results.iter().map(|r| r.dataset.as_str()).collect();

    let mut groups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for d in &datasets {
        if !present.contains(d.name()) {
            continue;
        }
        match group_key(d, a.group_by) {
            Some(k) => {
                groups.entry(k).or_default().insert(d.name().to_owned());
            }
            None => log::warn!("{}: no group under {:?}, left out of grouped tables", d.name(), a.group_by),
        }
    }
    let mut ordered: Vec<(String, BTreeSet<String>)> = vec![("all".into(), present.iter().map(|s| s.to_string()).collect())];
    ordered.extend(groups);

    out_dir(&a.out)?;
    let summary_path = a.out.join("report_summary.csv");
    let ranks_path = a.out.join("report_ranks.csv");
    let pvalues_path = a.out.join("report_pvalues.csv");
    let mut summary = csv::Writer::from_writer(create(&summary_path)?);
    let mut ranks = csv::Writer::from_writer(create(&ranks_path)?);
    let mut pvalues = csv::Writer::from_writer(create(&pvalues_path)?);
    summary
        .write_record([
            "group",
            "datasets",
            "algorithm",
            "default_config",
            "default_acc",
            "default_nmi",
            "default_ari",
            "best_acc",
            "best_nmi",
            "best_ari",
            "delta_acc",
            "delta_nmi",
            "delta_ari",
        ])
        .map_err(Error::from)?;
    ranks
        .write_record(["group", "metric", "datasets", "algorithm", "average_rank"])
        .map_err(Error::from)?;
    pvalues
        .write_record(["group", "metric", "algorithm_a", "algorithm_b", "p_value", "zero_variance"])
        .map_err(Error::from)?;

    let mut outputs = vec![summary_path.clone(), ranks_path.clone(), pvalues_path.clone()];
    for (group, names) in &ordered {
        let subset: Vec<RunResult> = results.iter().filter(|r| names.contains(&r.dataset)).cloned().collect();
        if subset.is_empty() {
            continue;
        }
        for s in sweep::summarize(&subset, &grids, a.reducer)? {
            let mut rec = vec![
                group.clone(),
                names.len().to_string(),
                s.algorithm.to_string(),
                s.default_config.clone(),
            ];
            for block in [s.default, s.best, s.delta] {
                rec.extend(block.iter().map(|v| if v.is_finite() { v.to_string() } else { String::new() }));
            }
            summary.write_record(&rec).map_err(Error::from)?;
        }
        let mut best = Vec::new();
        for metric in Metric::ALL {
            let pm = perfmatrix::best_by_algorithm(&perfmatrix::build_matrix_with(&subset, metric, a.reducer)?)?;
            let dense = pm.complete_rows();
            let (n, m) = dense.shape();
            if n >= 2 && m >= 2 {
                let rt = perfmatrix::ranks_and_tests(dense.values())?;
                for (algo, r) in dense.col_names().iter().zip(&rt.average_ranks) {
                    ranks
                        .write_record([group, metric.as_str(), &n.to_string(), algo, &r.to_string()])
                        .map_err(Error::from)?;
                }
                for x in 0..m {
                    for y in (x + 1)..m {
                        pvalues
                            .write_record([
                                group.as_str(),
                                metric.as_str(),
                                &dense.col_names()[x],
                                &dense.col_names()[y],
                                &rt.p_values[x][y].to_string(),
                                &rt.degenerate[x][y].to_string(),
                            ])
                            .map_err(Error::from)?;
                    }
                }
            } else {
                log::warn!("group {group}, {metric}: {n} complete datasets x {m} algorithms, too few for rank tests");
            }
            best.push(pm);
        }
        if group == "all" {
            outputs.extend(write_vectors(&a.out, &best)?);
        }
    }
    for (w, p) in [(summary, &summary_path), (ranks, &ranks_path), (pvalues, &pvalues_path)] {
        w.into_inner()
            .map_err(|e| Error::invalid(e.to_string()))?
            .flush()
            .map_err(|e| Error::io(p, e))?;
    }
    Ok(json!({"groups": ordered.iter().map(|(g, _)| g.clone()).collect::<Vec<_>>(), "outputs": display(&outputs)}))
}

/// Concatenated per-algorithm best vectors over datasets complete under all
/// three metrics.
fn write_vectors(dir: &Path, best: &[PerformanceMatrix]) -> Result<Vec<PathBuf>, CliError> {
    let keep: Vec<usize> = (0..best[0].shape().0)
        .filter(|&i| best.iter().all(|pm| (0..pm.shape().1).all(|j| pm.get(i, j).is_some())))
        .collect();
    if keep.is_empty()
        || best
            .iter()
            .any(|pm| pm.col_names() != best[0].col_names() || pm.row_names() != best[0].row_names())
    {
        log::warn!("no dataset has every algorithm observed under all metrics; performance vectors skipped");
        return Ok(Vec::new());
    }
    let dense: Vec<nalgebra::DMatrix<f64>> = best
        .iter()
        .map(|pm| nalgebra::DMatrix::from_fn(keep.len(), pm.shape().1, |r, j| pm.values()[(keep[r], j)]))
        .collect();
    let (algo_view, data_view) = perfmatrix::performance_vectors(&dense[0], &dense[1], &dense[2])?;
    let datasets: Vec<&str> = keep.iter().map(|&i| best[0].row_names()[i].as_str()).collect();
    let algos = best[0].col_names();

    let mut written = Vec::new();
    let p = dir.join("vectors_algorithms.csv");
    let mut w = csv::Writer::from_writer(create(&p)?);
    let mut header = vec!["algorithm".to_owned()];
    for metric in Metric::ALL {
        header.extend(datasets.iter().map(|d| format!("{}:{d}", metric.as_str())));
    }
    w.write_record(&header).map_err(Error::from)?;
    for (a, name) in algos.iter().enumerate() {
        let mut rec = vec![name.clone()];
        rec.extend(algo_view.row(a).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(Error::from)?;
    }
    w.flush().map_err(|e| Error::io(&p, e))?;
    written.push(p);

    let p = dir.join("vectors_datasets.csv");
    let mut w = csv::Writer::from_writer(create(&p)?);
    let mut header = vec!["dataset".to_owned()];
    for metric in Metric::ALL {
        header.extend(algos.iter().map(|a| format!("{}:{a}", metric.as_str())));
    }
    w.write_record(&header).map_err(Error::from)?;
    for (i, name) in datasets.iter().enumerate() {
        let mut rec = vec![name.to_string()];
        rec.extend(data_view.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(Error::from)?;
    }
    w.flush().map_err(|e| Error::io(&p, e))?;
    written.push(p);
    Ok(written)
}
