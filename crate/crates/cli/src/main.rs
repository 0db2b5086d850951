//! `clubench`: run the clustering benchmark pipeline from the command line.
//!
//! Every subcommand writes its files under `--out` and prints one JSON
//! status line on stdout. Exit codes: 0 success, 1 usage or argument error,
//! 2 runtime failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clubench::metrics::Metric;
use clubench::sweep::Reducer;
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(
    name = "clubench",
    version,
    about = "Clustering benchmark: sweeps, performance matrices, meta-features and selection"
)]
struct Cli {
    /// Worker threads for parallel stages (defaults to the number of CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write synthetic labeled datasets (blobs, rings, anisotropic mixtures).
    Demo(DemoArgs),
    /// Run every grid configuration on every dataset.
    Sweep(SweepArgs),
    /// Default-versus-best table per algorithm.
    Summarize(SummarizeArgs),
    /// Datasets x configurations matrix of one metric.
    Matrix(MatrixArgs),
    /// Cumulative contribution ratio of a matrix's singular values.
    Ccr(CcrArgs),
    /// Masked low-rank completion experiment.
    Complete(CompleteArgs),
    /// Meta-feature vectors for every dataset.
    Metafeat(MetafeatArgs),
    /// Cross-validated configuration selection against baselines.
    Select(SelectArgs),
    /// Grouped summaries, average ranks and paired tests.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Base seed.
    #[arg(long, env = "CLUBENCH_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct PrepArgs {
    /// Use raw features instead of per-feature standardization.
    #[arg(long)]
    no_standardize: bool,
    /// Subsample datasets larger than this many samples.
    #[arg(long, default_value_t = clubench::data::DEFAULT_CAP)]
    cap: usize,
}

#[derive(Debug, Args)]
struct DemoArgs {
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    seed: SeedArg,
    /// Approximate samples per dataset.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Number of datasets.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Directory of dataset CSVs.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated algorithm names (all ten when omitted).
    #[arg(long)]
    algos: Option<String>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    repeats: u32,
    #[command(flatten)]
    seed: SeedArg,
    /// JSON grid overrides.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[command(flatten)]
    prep: PrepArgs,
    /// Put run times into the results CSV instead of the timing sidecar.
    #[arg(long)]
    inline_timing: bool,
    #[arg(long, default_value = "mean")]
    reducer: Reducer,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "mean")]
    reducer: Reducer,
    /// JSON grid overrides that define the default configurations.
    #[arg(long)]
    grid: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long, default_value = "acc")]
    metric: Metric,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "mean")]
    reducer: Reducer,
}

#[derive(Debug, Args)]
struct CcrArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Number of leading singular values.
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    j: u64,
    #[arg(long, default_value = "acc")]
    metric: Metric,
    /// Also write ccr.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompleteArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value = "acc")]
    metric: Metric,
    /// Fraction of entries hidden.
    #[arg(long, default_value_t = 0.5, value_parser = parse_mr)]
    mr: f64,
    /// Factorization rank (clamped to the matrix's smaller side).
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    rank: u64,
    /// Number of mask seeds.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    seeds: u64,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MetafeatArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    prep: PrepArgs,
}

#[derive(Debug, Args)]
struct SelectArgs {
    /// Meta-feature CSV.
    #[arg(long)]
    meta: PathBuf,
    /// Manifest JSON (defaults to meta_manifest.json next to the meta CSV).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// ACC, NMI and ARI matrix CSVs, comma-separated in that order.
    #[arg(long, value_delimiter = ',', required = true)]
    matrices: Vec<PathBuf>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    trees: u64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GroupBy {
    Modality,
    Dim,
    Ir,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    results: PathBuf,
    /// Dataset directory, needed for grouping.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "modality")]
    group_by: GroupBy,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "mean")]
    reducer: Reducer,
    #[arg(long)]
    grid: Option<PathBuf>,
}

fn parse_mr(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid mr {s:?}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err("mr must be in (0,1)".into())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] clubench::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

fn status(command: &str, result: &Result<Value, CliError>) -> Value {
    match result {
        Ok(extra) => {
            let mut v = json!({"status": "ok", "command": command});
            if let (Some(obj), Value::Object(more)) = (v.as_object_mut(), extra) {
                obj.extend(more.clone());
            }
            v
        }
        Err(e) => json!({"status": "error", "command": command, "exit_code": e.exit_code(), "message": e.to_string()}),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            if code != 0 {
                println!("{}", json!({"status": "error", "exit_code": 1, "message": e.kind().to_string()}));
            }
            return ExitCode::from(code);
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            println!(
                "{}",
                json!({"status": "error", "exit_code": 1, "message": "--workers must be at least 1"})
            );
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let (name, result) = commands::run(cli.command, cli.workers);
    println!("{}", status(name, &result));
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
