use std::io::{Read, Write};
use std::path::Path;

use super::run::RunResult;
use super::summary::AlgorithmSummary;
use crate::{Error, Result};

pub const RESULTS_HEADER: [&str; 8] = ["dataset", "config_id", "repeat", "seed", "acc", "nmi", "ari", "time_s"];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes results with MISSING as an empty field. With `inline_timing`
/// false the `time_s` column is left empty so reruns are byte-identical.
pub fn write_results<W: Write>(w: W, results: &[RunResult], inline_timing: bool) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(RESULTS_HEADER)?;
    for r in results {
        wr.write_record([
            r.dataset.clone(),
            r.config_id.clone(),
            r.repeat.to_string(),
            r.seed.to_string(),
            fmt_opt(r.acc),
            fmt_opt(r.nmi),
            fmt_opt(r.ari),
            if inline_timing { fmt_opt(r.time_s) } else { String::new() },
        ])?;
    }
    wr.flush().map_err(|e| Error::io("results", e))?;
    Ok(())
}

/// Per-cell wall times, kept apart from the deterministic results file.
pub fn write_timings<W: Write>(w: W, results: &[RunResult]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["dataset", "config_id", "repeat", "time_s"])?;
    for r in results {
        wr.write_record([r.dataset.clone(), r.config_id.clone(), r.repeat.to_string(), fmt_opt(r.time_s)])?;
    }
    wr.flush().map_err(|e| Error::io("timings", e))?;
    Ok(())
}

fn parse_opt(field: &str, what: &str, line: u64) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    let v: f64 = field
        .parse()
        .map_err(|_| Error::invalid(format!("line {line}: bad {what} value {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::invalid(format!("line {line}: non-finite {what}")));
    }
    Ok(Some(v))
}

/// Reads a results CSV; labels are not stored in the file and come back `None`.
pub fn read_results<R: Read>(r: R) -> Result<Vec<RunResult>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rd.headers()?.clone();
    let header: Vec<&str> = headers.iter().collect();
    if header != RESULTS_HEADER {
        return Err(Error::invalid(format!("unexpected results header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != RESULTS_HEADER.len() {
            return Err(Error::invalid(format!("line {line}: expected 8 fields")));
        }
        let repeat = rec[2]
            .parse()
            .map_err(|_| Error::invalid(format!("line {line}: bad repeat {:?}", &rec[2])))?;
        let seed = rec[3]
            .parse()
            .map_err(|_| Error::invalid(format!("line {line}: bad seed {:?}", &rec[3])))?;
        let time_s = parse_opt(&rec[7], "time_s", line)?;
        if time_s.is_some_and(|t| t < 0.0) {
            return Err(Error::invalid(format!("line {line}: negative time_s")));
        }
        if rec[0].is_empty() || rec[1].is_empty() {
            return Err(Error::invalid(format!("line {line}: empty dataset or config_id")));
        }
        out.push(RunResult {
            dataset: rec[0].to_owned(),
            config_id: rec[1].to_owned(),
            repeat,
            seed,
            labels: None,
            acc: parse_opt(&rec[4], "acc", line)?,
            nmi: parse_opt(&rec[5], "nmi", line)?,
            ari: parse_opt(&rec[6], "ari", line)?,
            time_s,
            error: None,
        });
    }
    Ok(out)
}

pub fn read_results_file(path: &Path) -> Result<Vec<RunResult>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_results(f)
}

pub fn write_summary<W: Write>(w: W, rows: &[AlgorithmSummary]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
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
    ])?;
    for s in rows {
        let mut rec = vec![s.algorithm.to_string(), s.default_config.clone()];
        for block in [s.default, s.best, s.delta] {
            rec.extend(block.iter().map(|v| if v.is_finite() { v.to_string() } else { String::new() }));
        }
        wr.write_record(&rec)?;
    }
    wr.flush().map_err(|e| Error::io("summary", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_missing() {
        let results = vec![
            RunResult {
                dataset: "a".into(),
                config_id: "SSC/lambda=1.0".into(),
                repeat: 2,
                seed: u64::MAX,
                labels: Some(vec![0, 1]),
                acc: Some(0.1 + 0.2),
                nmi: None,
                ari: Some(-0.25),
                time_s: Some(1.5),
                error: None,
            },
            RunResult {
                dataset: "b,c".into(),
                config_id: "KMeans/init=random;metric=cosine;n_init=10;max_iter=500".into(),
                repeat: 0,
                seed: 7,
                labels: None,
                acc: None,
                nmi: None,
                ari: None,
                time_s: None,
                error: Some("x".into()),
            },
        ];
        let mut buf = Vec::new();
        write_results(&mut buf, &results, true).unwrap();
        let back = read_results(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].acc, results[0].acc);
        assert_eq!(back[0].nmi, None);
        assert_eq!(back[0].seed, u64::MAX);
        assert_eq!(back[1].dataset, "b,c");
        assert_eq!(back[0].time_s, Some(1.5));

        let mut plain = Vec::new();
        write_results(&mut plain, &results, false).unwrap();
        assert!(read_results(plain.as_slice()).unwrap().iter().all(|r| r.time_s.is_none()));
    }

    #[test]
    fn rejects_bad_header_and_values() {
        assert!(read_results("a,b\n1,2\n".as_bytes()).is_err());
        let bad = "dataset,config_id,repeat,seed,acc,nmi,ari,time_s\nd,SSC/lambda=1.0,x,0,,,,\n";
        assert!(read_results(bad.as_bytes()).is_err());
        let nan = "dataset,config_id,repeat,seed,acc,nmi,ari,time_s\nd,SSC/lambda=1.0,0,0,NaN,,,\n";
        assert!(read_results(nan.as_bytes()).is_err());
    }
}
