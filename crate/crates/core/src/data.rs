//! Embedding tables and dataset collections.
//!
//! An [`EmbeddingTable`] owns every vector the algorithms see (dataset points and
//! candidates alike). A [`DatasetCollection`] refers to table rows by index.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major table of `dim`-dimensional vectors with unique string ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    ids: Vec<String>,
    values: Vec<f64>,
    index: BTreeMap<String, usize>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            ids: Vec::new(),
            values: Vec::new(),
            index: BTreeMap::new(),
        })
    }

    /// Appends a row and returns its index.
    pub fn push(&mut self, id: impl Into<String>, vector: &[f64]) -> Result<usize> {
        let id = id.into();
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
                context: format!("row `{id}`"),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("row `{id}`"),
            });
        }
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        let row = self.ids.len();
        self.index.insert(id.clone(), row);
        self.ids.push(id);
        self.values.extend_from_slice(vector);
        Ok(row)
    }

    pub fn from_rows<I, S>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut table = Self::new(dim)?;
        for (id, v) in rows {
            table.push(id, &v)?;
        }
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Panics if `row` is out of range.
    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.dim..(row + 1) * self.dim]
    }

    pub fn id(&self, row: usize) -> &str {
        &self.ids[row]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn find(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}

/// An ordered family of datasets over rows of an [`EmbeddingTable`], with
/// optional per-row string attributes (numeric attributes are parsed on use).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetCollection {
    labels: Vec<String>,
    members: Vec<Vec<usize>>,
    attributes: BTreeMap<String, BTreeMap<usize, String>>,
}

impl DatasetCollection {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a dataset. Row references are checked against `table`.
    pub fn add_dataset(
        &mut self,
        table: &EmbeddingTable,
        label: impl Into<String>,
        rows: Vec<usize>,
    ) -> Result<()> {
        let label = label.into();
        if rows.is_empty() {
            return Err(Error::EmptyDataset(label));
        }
        if self.labels.contains(&label) {
            return Err(Error::InvalidConfig(format!("dataset `{label}` defined twice")));
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= table.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: table.len(),
            });
        }
        self.labels.push(label);
        self.members.push(rows);
        Ok(())
    }

    pub fn set_attribute(&mut self, name: impl Into<String>, row: usize, value: impl Into<String>) {
        self.attributes
            .entry(name.into())
            .or_default()
            .insert(row, value.into());
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn rows(&self, t: usize) -> &[usize] {
        &self.members[t]
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownDataset(label.to_string()))
    }

    pub fn rows_of(&self, label: &str) -> Result<&[usize]> {
        Ok(self.rows(self.position(label)?))
    }

    /// Distinct rows over all datasets, in order of first appearance.
    pub fn union_rows(&self) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        self.members
            .iter()
            .flatten()
            .copied()
            .filter(|r| seen.insert(*r))
            .collect()
    }

    pub fn attribute_names(&self) -> impl Iterator<Item = &str> {
        self.attributes.keys().map(String::as_str)
    }

    pub fn attribute(&self, name: &str, row: usize) -> Option<&str> {
        self.attributes.get(name)?.get(&row).map(String::as_str)
    }

    pub fn attribute_rows(&self, name: &str) -> impl Iterator<Item = (usize, &str)> {
        self.attributes
            .get(name)
            .into_iter()
            .flat_map(|m| m.iter().map(|(r, v)| (*r, v.as_str())))
    }

    /// Values of a categorical attribute for `rows`; errors list every row
    /// without a value.
    pub fn categorical<'a>(
        &'a self,
        table: &EmbeddingTable,
        name: &str,
        rows: &[usize],
    ) -> Result<Vec<&'a str>> {
        let mut missing = Vec::new();
        let mut out = Vec::with_capacity(rows.len());
        for &r in rows {
            match self.attribute(name, r) {
                Some(v) => out.push(v),
                None => missing.push(table.id(r).to_string()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingAttribute {
                name: name.to_string(),
                rows: missing,
            });
        }
        Ok(out)
    }

    /// Values of a numeric attribute for `rows`.
    pub fn numeric(&self, table: &EmbeddingTable, name: &str, rows: &[usize]) -> Result<Vec<f64>> {
        let raw = self.categorical(table, name, rows)?;
        raw.iter()
            .zip(rows)
            .map(|(v, &r)| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::NonNumericAttribute {
                        name: name.to_string(),
                        row: table.id(r).to_string(),
                        value: v.to_string(),
                    })
            })
            .collect()
    }
}

/// How attribute values are mapped to dataset labels.
#[derive(Debug, Clone, PartialEq)]
pub enum Binning {
    /// One dataset per distinct value, ordered by first appearance.
    Categorical,
    /// Numeric bins `[origin + k·width, origin + (k+1)·width)`, labeled by their
    /// lower edge and ordered ascending. Decades are `width = 10, origin = 0`.
    Width { width: f64, origin: f64 },
}

/// Re-partitions every row of `collection` (each distinct row once) into new
/// datasets keyed by the binned value of `attribute`. Attributes carry over.
pub fn partition_by_attribute(
    table: &EmbeddingTable,
    collection: &DatasetCollection,
    attribute: &str,
    binning: &Binning,
) -> Result<DatasetCollection> {
    let rows = collection.union_rows();
    let mut bins: Vec<(f64, String, Vec<usize>)> = Vec::new();
    match binning {
        Binning::Categorical => {
            let values = collection.categorical(table, attribute, &rows)?;
            for (&r, v) in rows.iter().zip(values) {
                match bins.iter_mut().find(|b| b.1 == v) {
                    Some(b) => b.2.push(r),
                    None => bins.push((0.0, v.to_string(), alloc::vec![r])),
                }
            }
        }
        Binning::Width { width, origin } => {
            if !(*width > 0.0 && width.is_finite() && origin.is_finite()) {
                return Err(Error::InvalidConfig(format!("bin width {width} must be positive")));
            }
            let values = collection.numeric(table, attribute, &rows)?;
            for (&r, v) in rows.iter().zip(values) {
                let k = libm::floor((v - origin) / width);
                let lower = origin + k * width;
                match bins.iter_mut().find(|b| b.0 == lower) {
                    Some(b) => b.2.push(r),
                    None => bins.push((lower, format_edge(lower), alloc::vec![r])),
                }
            }
            bins.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
    }
    let mut out = DatasetCollection::new();
    for (_, label, members) in bins {
        out.add_dataset(table, label, members)?;
    }
    out.attributes = collection.attributes.clone();
    Ok(out)
}

fn format_edge(x: f64) -> String {
    if x == libm::trunc(x) && libm::fabs(x) < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}
