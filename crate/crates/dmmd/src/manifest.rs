//! JSON manifest plus comma-delimited vector and attribute files.
//!
//! ```json
//! {
//!   "id_column": true,
//!   "datasets": [{"name": "a", "path": "a.csv"}, {"name": "b", "path": "b.csv"}],
//!   "candidates": {"datasets": ["b"], "files": ["pool.csv"]},
//!   "attributes": "attributes.csv"
//! }
//! ```
//!
//! `candidates` is either the string `"union"` (the default: every dataset row)
//! or an explicit pool made of the rows of the listed datasets followed by the
//! rows of the listed files. Vector files hold one vector per line, with a
//! leading id field when `id_column` is set; otherwise rows are named
//! `<name>:<index>`. The attribute file holds `id,key,value` triples, with an
//! optional header line. Relative paths resolve against the manifest's
//! directory. A row id may appear in several files as long as its vector is
//! identical everywhere.

use std::fs;
use std::path::{Path, PathBuf};

use dmmd_core::{DatasetCollection, EmbeddingTable};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub id_column: bool,
    pub datasets: Vec<DatasetEntry>,
    #[serde(default)]
    pub candidates: Candidates,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attributes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Candidates {
    Keyword(String),
    Explicit {
        #[serde(default)]
        datasets: Vec<String>,
        #[serde(default)]
        files: Vec<String>,
    },
}

impl Default for Candidates {
    fn default() -> Self {
        Candidates::Keyword("union".into())
    }
}

/// Everything a manifest describes, validated.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub manifest: Manifest,
    pub root: PathBuf,
    pub table: EmbeddingTable,
    pub collection: DatasetCollection,
    /// Candidate pool as table rows.
    pub candidates: Vec<usize>,
}

pub type Record = (String, Vec<f64>);

/// Parse one vector file. `prefix` names rows when the file has no id column.
pub fn read_vectors(path: &Path, id_column: bool, prefix: &str) -> Result<Vec<Record>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    let mut dim = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::format(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut fields = record.iter();
        let id = if id_column {
            match fields.next() {
                Some(id) if !id.is_empty() => id.to_string(),
                _ => return Err(Error::format(path, line, "missing row id")),
            }
        } else {
            format!("{prefix}:{}", out.len())
        };
        let vector = fields
            .map(|tok| match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(v) => Err(Error::format(path, line, format!("non-finite value `{v}`"))),
                Err(_) => Err(Error::format(path, line, format!("non-numeric token `{tok}`"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        if vector.is_empty() {
            return Err(Error::format(path, line, "row has no values"));
        }
        match dim {
            None => dim = Some(vector.len()),
            Some(d) if d != vector.len() => {
                return Err(Error::format(
                    path,
                    line,
                    format!("row has {} values, expected {d}", vector.len()),
                ))
            }
            _ => {}
        }
        out.push((id, vector));
    }
    Ok(out)
}

/// `(id, key, value)` triples.
pub fn read_attributes(path: &Path) -> Result<Vec<(u64, String, String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::format(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(Error::format(path, line, "expected id,key,value"));
        }
        if i == 0 && &record[0] == "id" && &record[1] == "key" && &record[2] == "value" {
            continue;
        }
        out.push((line, record[0].to_string(), record[1].to_string(), record[2].to_string()));
    }
    Ok(out)
}

fn insert(table: &mut EmbeddingTable, path: &Path, line: usize, id: String, v: &[f64]) -> Result<usize> {
    if let Some(row) = table.find(&id) {
        let same = table.row(row).iter().zip(v).all(|(a, b)| a.to_bits() == b.to_bits());
        if same && table.row(row).len() == v.len() {
            return Ok(row);
        }
        return Err(Error::format(
            path,
            line as u64,
            format!("row id `{id}` appears earlier with a different vector"),
        ));
    }
    table.push(id, v).map_err(|e| Error::format(path, line as u64, e.to_string()))
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::manifest(path, e.to_string()))
}

/// Load and validate the collection a manifest describes. Files are parsed in
/// parallel; rows enter the table in manifest order.
pub fn load_collection(manifest_path: &Path) -> Result<Loaded> {
    let manifest = read_manifest(manifest_path)?;
    let root = manifest_path.parent().unwrap_or(Path::new("")).to_path_buf();
    if manifest.datasets.is_empty() {
        return Err(Error::manifest(manifest_path, "no datasets listed"));
    }
    let (pool_sets, pool_files) = match &manifest.candidates {
        Candidates::Keyword(k) if k == "union" => {
            (manifest.datasets.iter().map(|d| d.name.clone()).collect(), Vec::new())
        }
        Candidates::Keyword(k) => {
            return Err(Error::manifest(
                manifest_path,
                format!("candidates must be \"union\" or an object, found \"{k}\""),
            ))
        }
        Candidates::Explicit { datasets, files } => (datasets.clone(), files.clone()),
    };
    for name in &pool_sets {
        if !manifest.datasets.iter().any(|d| &d.name == name) {
            return Err(Error::manifest(manifest_path, format!("candidate dataset `{name}` is not listed")));
        }
    }
    let mut jobs: Vec<(PathBuf, String)> = manifest
        .datasets
        .iter()
        .map(|d| (root.join(&d.path), d.name.clone()))
        .collect();
    jobs.extend(pool_files.iter().map(|f| (root.join(f), f.clone())));
    let parsed: Vec<Result<Vec<Record>>> = jobs
        .par_iter()
        .map(|(p, prefix)| read_vectors(p, manifest.id_column, prefix))
        .collect();
    let parsed = parsed.into_iter().collect::<Result<Vec<_>>>()?;

    let dim = parsed
        .iter()
        .find_map(|recs| recs.first().map(|r| r.1.len()))
        .ok_or_else(|| Error::manifest(manifest_path, "no vectors in any file"))?;
    let mut table = EmbeddingTable::new(dim)?;
    let mut file_rows = Vec::with_capacity(parsed.len());
    for ((path, _), recs) in jobs.iter().zip(parsed) {
        let mut rows = Vec::with_capacity(recs.len());
        for (i, (id, v)) in recs.into_iter().enumerate() {
            if v.len() != dim {
                return Err(Error::format(
                    path,
                    i as u64 + 1,
                    format!("row has {} values, expected {dim}", v.len()),
                ));
            }
            rows.push(insert(&mut table, path, i + 1, id, &v)?);
        }
        file_rows.push(rows);
    }

    let mut collection = DatasetCollection::new();
    for ((entry, rows), (path, _)) in manifest.datasets.iter().zip(&file_rows).zip(&jobs) {
        if rows.is_empty() {
            return Err(Error::format(path, 0, format!("dataset `{}` is empty", entry.name)));
        }
        collection.add_dataset(&table, entry.name.clone(), rows.clone())?;
    }

    let mut candidates = Vec::new();
    let mut seen = vec![false; table.len()];
    let pool = pool_sets
        .iter()
        .map(|n| collection.rows_of(n).map(<[usize]>::to_vec))
        .collect::<dmmd_core::Result<Vec<_>>>()?;
    for rows in pool.iter().chain(&file_rows[manifest.datasets.len()..]) {
        for &r in rows {
            if !seen[r] {
                seen[r] = true;
                candidates.push(r);
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::manifest(manifest_path, "candidate pool is empty"));
    }

    if let Some(attr) = &manifest.attributes {
        let path = root.join(attr);
        for (line, id, key, value) in read_attributes(&path)? {
            let row = table
                .find(&id)
                .ok_or_else(|| Error::format(&path, line, format!("unknown row id `{id}`")))?;
            collection.set_attribute(key, row, value);
        }
    }

    Ok(Loaded {
        manifest,
        root,
        table,
        collection,
        candidates,
    })
}

/// Shortest decimal that parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn write_csv(path: &Path, rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::io(path, e.into()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| Error::io(path, e.into()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn vector_rows<'a>(table: &'a EmbeddingTable, rows: &'a [usize]) -> impl Iterator<Item = Vec<String>> + 'a {
    rows.iter().map(move |&r| {
        let mut rec = Vec::with_capacity(table.dim() + 1);
        rec.push(table.id(r).to_string());
        rec.extend(table.row(r).iter().map(|&v| fmt_f64(v)));
        rec
    })
}

/// Write `collection` under `dir` (which must exist) as `manifest.json`, one
/// `data_<t>.csv` per dataset, `candidates.csv` unless the pool is the dataset
/// union, and `attributes.csv` when any attribute is set. Vectors round-trip
/// bit for bit.
pub fn write_collection(
    dir: &Path,
    table: &EmbeddingTable,
    collection: &DatasetCollection,
    candidates: &[usize],
) -> Result<PathBuf> {
    let mut datasets = Vec::with_capacity(collection.len());
    for (t, label) in collection.labels().iter().enumerate() {
        let file = format!("data_{t}.csv");
        write_csv(&dir.join(&file), vector_rows(table, collection.rows(t)))?;
        datasets.push(DatasetEntry {
            name: label.clone(),
            path: file,
        });
    }
    let candidates_spec = if candidates == collection.union_rows().as_slice() {
        Candidates::default()
    } else {
        write_csv(&dir.join("candidates.csv"), vector_rows(table, candidates))?;
        Candidates::Explicit {
            datasets: Vec::new(),
            files: vec!["candidates.csv".into()],
        }
    };
    let names: Vec<&str> = collection.attribute_names().collect();
    let attributes = if names.is_empty() {
        None
    } else {
        let mut rows = vec![vec!["id".to_string(), "key".to_string(), "value".to_string()]];
        for name in names {
            for (row, value) in collection.attribute_rows(name) {
                rows.push(vec![table.id(row).to_string(), name.to_string(), value.to_string()]);
            }
        }
        write_csv(&dir.join("attributes.csv"), rows)?;
        Some("attributes.csv".to_string())
    };
    let manifest = Manifest {
        id_column: true,
        datasets,
        candidates: candidates_spec,
        attributes,
    };
    let path = dir.join(MANIFEST_FILE);
    write_json(&path, &manifest)?;
    Ok(path)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
