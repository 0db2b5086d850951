use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Manifest, MetaVector};
use crate::{Error, Result};

/// Meta-feature rows keyed by dataset, as read back from CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaTable {
    pub feature_names: Vec<String>,
    pub datasets: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl MetaTable {
    pub fn row(&self, dataset: &str) -> Option<&[f64]> {
        self.datasets.iter().position(|d| d == dataset).map(|i| self.rows[i].as_slice())
    }

    /// Errors unless the columns are exactly the manifest's names in order.
    pub fn check_manifest(&self, manifest: &Manifest) -> Result<()> {
        if self.feature_names.iter().map(String::as_str).ne(manifest.names()) {
            return Err(Error::ManifestMismatch("meta-feature columns differ from the manifest".into()));
        }
        Ok(())
    }
}

/// One row per dataset under a `dataset,<feature names>` header. Every
/// vector must share the first vector's manifest.
pub fn write_meta_csv<W: Write>(w: W, rows: &[(String, MetaVector)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let Some((_, first)) = rows.first() else {
        return Err(Error::invalid("no meta-feature rows to write"));
    };
    let manifest = first.manifest();
    let mut header = vec!["dataset"];
    header.extend(manifest.names());
    wtr.write_record(&header)?;
    for (name, mv) in rows {
        if mv.manifest() != manifest {
            return Err(Error::ManifestMismatch(format!("dataset {name} has a different manifest")));
        }
        let mut rec = vec![name.clone()];
        rec.extend(mv.values().iter().map(|v| format!("{v:?}")));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<meta csv>", e))?;
    Ok(())
}

pub fn read_meta_csv<R: Read>(r: R) -> Result<MetaTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("dataset") {
        return Err(Error::invalid("meta CSV must start with a dataset column"));
    }
    let feature_names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if feature_names.is_empty() {
        return Err(Error::invalid("meta CSV has no feature columns"));
    }
    if feature_names.iter().collect::<BTreeSet<_>>().len() != feature_names.len() {
        return Err(Error::invalid("meta CSV has duplicate feature columns"));
    }
    let mut datasets = Vec::new();
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::invalid(format!(
                "meta CSV row has {} fields, expected {}",
                rec.len(),
                header.len()
            )));
        }
        let name = rec[0].to_owned();
        if !seen.insert(name.clone()) {
            return Err(Error::invalid(format!("duplicate dataset {name} in meta CSV")));
        }
        let values = rec
            .iter()
            .skip(1)
            .zip(&feature_names)
            .map(|(s, f)| match s.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::invalid(format!("dataset {name}: feature {f} is not a finite number: {s:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        datasets.push(name);
        rows.push(values);
    }
    Ok(MetaTable {
        feature_names,
        datasets,
        rows,
    })
}

pub fn write_manifest_json<W: Write>(w: W, manifest: &Manifest) -> Result<()> {
    serde_json::to_writer_pretty(w, manifest)?;
    Ok(())
}

pub fn read_manifest_json<R: Read>(r: R) -> Result<Manifest> {
    let m: Manifest = serde_json::from_reader(r)?;
    if m.is_empty() {
        return Err(Error::invalid("manifest lists no features"));
    }
    if m.features.iter().map(|f| &f.name).collect::<BTreeSet<_>>().len() != m.len() {
        return Err(Error::invalid("manifest has duplicate feature names"));
    }
    Ok(m)
}
