use std::path::Path;
use std::process::{Command, Output};

fn clubench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clubench"))
        .args(args)
        .env_remove("CLUBENCH_SEED")
        .output()
        .unwrap()
}

fn status_line(out: &Output) -> serde_json::Value {
    let stdout = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(stdout.lines().last().expect("status line")).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = clubench(&["complete", "--matrix", "m.csv", "--mr", "1.5", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mr must be in (0,1)"));
    assert_eq!(clubench(&["sweep", "--bogus"]).status.code(), Some(1));
    let out = clubench(&["select", "--meta", "m.csv", "--matrices", "a.csv,b.csv", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(status_line(&out)["exit_code"], 1);
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing_here");
    let out = clubench(&["sweep", "--data", s(&missing), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let v = status_line(&out);
    assert_eq!(v["status"], "error");
    assert_eq!(v["command"], "sweep");
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(clubench(&["--help"]).status.code(), Some(0));
    assert_eq!(clubench(&["--version"]).status.code(), Some(0));
}

#[test]
fn demo_sweep_summarize_round() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let sweep = dir.path().join("sweep");
    let out = clubench(&["demo", "--out", s(&data), "--n", "40", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csvs = std::fs::read_dir(&data)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(csvs, 4);

    let out = clubench(&[
        "sweep",
        "--data",
        s(&data),
        "--out",
        s(&sweep),
        "--algos",
        "KMeans,BIRCH",
        "--repeats",
        "2",
        "--workers",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let results = std::fs::read_to_string(sweep.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 4 * (6 + 12) * 2);
    assert!(sweep.join("results.timing.csv").exists());
    // run times live in the sidecar, so the time_s column stays empty
    assert!(results.lines().skip(1).all(|l| l.ends_with(',')));

    let out = clubench(&["summarize", "--results", s(&sweep.join("results.csv")), "--out", s(&sweep)]);
    assert!(out.status.success());
    let summary = std::fs::read_to_string(sweep.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);

    let out = clubench(&[
        "matrix",
        "--results",
        s(&sweep.join("results.csv")),
        "--metric",
        "nmi",
        "--out",
        s(&sweep),
    ]);
    assert!(out.status.success());
    let out = clubench(&["ccr", "--matrix", s(&sweep.join("matrix_nmi.csv")), "--metric", "nmi", "--j", "2"]);
    assert!(out.status.success());
    let ccr = status_line(&out)["ccr"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&ccr));
}
