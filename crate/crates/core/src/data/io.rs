use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{relabel_first_occurrence, Dataset, Modality};
use crate::{Error, Result};

/// Optional `<stem>.json` file next to a dataset CSV.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modality: Option<Modality>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl Sidecar {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

/// How the label column is located in a CSV header.
#[derive(Clone, Copy, Debug)]
pub enum LabelSpec<'a> {
    /// No label column; K must come from the sidecar.
    None,
    /// The named column must exist.
    Required(&'a str),
    /// Use the named column when the header has it.
    IfPresent(&'a str),
}

/// Parses a dataset from CSV text: UTF-8, header row, comma separated.
///
/// Labels are relabeled to `0..K` by first occurrence. Feature cells must
/// parse as finite numbers.
pub fn parse_csv<R: Read>(reader: R, name: &str, label: LabelSpec<'_>, sidecar: Option<&Sidecar>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let label_idx = match label {
        LabelSpec::None => None,
        LabelSpec::Required(col) => Some(
            headers
                .iter()
                .position(|h| h == col)
                .ok_or_else(|| Error::MissingLabelColumn(col.to_owned()))?,
        ),
        LabelSpec::IfPresent(col) => headers.iter().position(|h| h == col),
    };
    let m = headers.len() - usize::from(label_idx.is_some());
    if m == 0 {
        return Err(Error::invalid("no feature columns"));
    }

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let mut n = 0usize;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != headers.len() {
            return Err(Error::invalid(format!(
                "row {row} has {} fields, header has {}",
                rec.len(),
                headers.len()
            )));
        }
        for (j, cell) in rec.iter().enumerate() {
            if Some(j) == label_idx {
                if cell.is_empty() {
                    return Err(Error::invalid(format!("empty label at row {row}")));
                }
                raw_labels.push(cell.to_owned());
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::NonNumericFeature {
                        row,
                        column: headers[j].clone(),
                    })
                }
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let x = DMatrix::from_row_slice(n, m, &values);

    let name = sidecar.and_then(|s| s.name.clone()).unwrap_or_else(|| name.to_owned());
    let modality = sidecar.and_then(|s| s.modality).unwrap_or_default();
    let declared_k = sidecar.and_then(|s| s.k);

    if label_idx.is_some() {
        let y = relabel_first_occurrence(&raw_labels);
        let k = y.iter().max().map_or(0, |v| v + 1);
        if k < 2 {
            return Err(Error::SingleClass);
        }
        if let Some(dk) = declared_k {
            if dk != k {
                return Err(Error::invalid(format!("sidecar declares K={dk} but labels have {k} classes")));
            }
        }
        Dataset::new(name, x, Some(y), k, modality)
    } else {
        let k = declared_k.ok_or_else(|| Error::invalid("unlabeled dataset needs K in its sidecar manifest"))?;
        Dataset::new(name, x, None, k, modality)
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn read_sidecar(path: &Path) -> Result<Option<Sidecar>> {
    let sc = sidecar_path(path);
    if !sc.exists() {
        return Ok(None);
    }
    let bytes = fs::read(&sc).map_err(|e| Error::io(&sc, e))?;
    Sidecar::from_json(&bytes).map(Some)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Loads a dataset CSV; `label_column`, when given, must exist.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let sidecar = read_sidecar(path)?;
    let spec = match label_column {
        Some(c) => LabelSpec::Required(c),
        None => LabelSpec::None,
    };
    parse_csv(file, &stem(path), spec, sidecar.as_ref())
}

/// Loads every `*.csv` in a directory (sorted by file name), using a
/// `label` column when present.
pub fn load_dir(dir: impl AsRef<Path>) -> Result<Vec<Dataset>> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::invalid(format!("no .csv datasets in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let file = fs::File::open(p).map_err(|e| Error::io(p, e))?;
            let sidecar = read_sidecar(p)?;
            parse_csv(file, &stem(p), LabelSpec::IfPresent("label"), sidecar.as_ref())
        })
        .collect()
}

/// Writes `<dir>/<name>.csv` plus its sidecar manifest.
pub fn write_csv(d: &Dataset, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let path = dir.join(format!("{}.csv", d.name()));
    let mut w = csv::Writer::from_path(&path)?;
    let mut header: Vec<String> = (0..d.m()).map(|j| format!("f{j}")).collect();
    if d.labels().is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for i in 0..d.n() {
        let mut rec: Vec<String> = (0..d.m()).map(|j| format!("{}", d.x()[(i, j)])).collect();
        if let Some(y) = d.labels() {
            rec.push(y[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let sc = Sidecar {
        name: Some(d.name().to_owned()),
        modality: Some(d.modality()),
        k: Some(d.k()),
    };
    let sc_path = sidecar_path(&path);
    fs::write(&sc_path, serde_json::to_string_pretty(&sc)? + "\n").map_err(|e| Error::io(&sc_path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, label: LabelSpec<'_>) -> Result<Dataset> {
        parse_csv(text.as_bytes(), "t", label, None)
    }

    #[test]
    fn relabels_by_first_occurrence() {
        let d = parse("x,label\n1,a\n2,a\n3,b\n4,b\n", LabelSpec::Required("label")).unwrap();
        assert_eq!((d.n(), d.m(), d.k()), (4, 1, 2));
        assert_eq!(d.labels().unwrap(), &[0, 0, 1, 1]);
        let d = parse("x,label\n1,z\n2,a\n3,z\n4,a\n", LabelSpec::Required("label")).unwrap();
        assert_eq!(d.labels().unwrap(), &[0, 1, 0, 1]);
    }

    #[test]
    fn nan_cell_is_non_numeric() {
        let e = parse("x,y,label\n1,NaN,a\n2,3,b\n3,3,b\n", LabelSpec::Required("label")).unwrap_err();
        assert!(e.to_string().contains("non-numeric feature"), "{e}");
        let e = parse("x,label\n1,a\nfoo,b\n3,b\n", LabelSpec::Required("label")).unwrap_err();
        assert!(matches!(e, Error::NonNumericFeature { row: 1, .. }));
    }

    #[test]
    fn error_paths() {
        assert!(matches!(parse("x,label\n", LabelSpec::Required("label")), Err(Error::EmptyDataset)));
        assert!(matches!(
            parse("x,label\n1,a\n2,a\n", LabelSpec::Required("label")),
            Err(Error::SingleClass)
        ));
        assert!(matches!(
            parse("x,y\n1,2\n", LabelSpec::Required("label")),
            Err(Error::MissingLabelColumn(_))
        ));
        // unlabeled without a declared K
        assert!(parse("x,y\n1,2\n3,4\n", LabelSpec::None).is_err());
        let err = load_csv("/definitely/not/here.csv", None).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn unlabeled_with_sidecar() {
        let sc = Sidecar::from_json(br#"{"name":"emb","modality":"text","K":2}"#).unwrap();
        let d = parse_csv("a,b\n1,2\n3,4\n5,6\n".as_bytes(), "t", LabelSpec::None, Some(&sc)).unwrap();
        assert_eq!(d.name(), "emb");
        assert_eq!(d.k(), 2);
        assert_eq!(d.modality(), Modality::Text);
        assert!(d.labels().is_none());
    }

    #[test]
    fn iris_shaped_file_round_trips() {
        // 150 rows, 4 features, 3 equal classes
        let mut text = String::from("sl,sw,pl,pw,label\n");
        for i in 0..150 {
            let class = ["setosa", "versicolor", "virginica"][i / 50];
            text.push_str(&format!("{},{},{},{},{class}\n", i % 7, i % 5, i % 11, i % 3));
        }
        let d = parse(&text, LabelSpec::Required("label")).unwrap();
        assert_eq!((d.n(), d.m(), d.k()), (150, 4, 3));
        let s = super::super::imbalance_stats(d.labels().unwrap()).unwrap();
        assert!((s.r_mm - 1.000).abs() < 5e-4);

        let dir = tempfile::tempdir().unwrap();
        let path = write_csv(&d.clone().with_name("iris"), dir.path()).unwrap();
        let back = load_csv(&path, Some("label")).unwrap();
        assert_eq!(back.name(), "iris");
        assert_eq!(back.x(), d.x());
        assert_eq!(back.labels(), d.labels());
        let all = load_dir(dir.path()).unwrap();
        assert_eq!(all.len(), 1);
    }
}
