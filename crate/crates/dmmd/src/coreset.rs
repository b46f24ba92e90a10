//! JSON coreset file. Weight rows are written with 17 significant digits;
//! every other float uses the shortest round-trip form.

use std::fs;
use std::path::Path;

use dmmd_core::analysis::SharedSupport;
use dmmd_core::{DependentCoreset, EmbeddingTable, GramCache, KernelComponent, KernelModel};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::manifest::{fmt_f64, write_json};

pub const FORMAT: &str = "dmmd-coreset/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetFile {
    pub format: String,
    pub algorithm: String,
    pub epsilon_sq: f64,
    pub satisfied: bool,
    pub stop_reason: String,
    pub kernel: KernelMeta,
    pub datasets: Vec<String>,
    /// Row ids of the exemplars in selection order.
    pub support: Vec<String>,
    pub weights: Vec<WeightRow>,
    pub mmd_sq: Vec<f64>,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMeta {
    pub subsample_cap: usize,
    pub seed: u64,
    pub components: Vec<ComponentMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentMeta {
    pub tag: String,
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub dataset: String,
    #[serde(serialize_with = "sig17")]
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub m: usize,
    pub chosen: String,
    pub beta: Vec<f64>,
    pub mmd_sq: Vec<f64>,
    pub elapsed_seconds: f64,
}

fn sig17<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let raw: Vec<Box<RawValue>> = xs
        .iter()
        .map(|x| RawValue::from_string(format!("{x:.16e}")).expect("finite weight"))
        .collect();
    raw.serialize(s)
}

impl CoresetFile {
    pub fn new(coreset: &DependentCoreset, cache: &GramCache, table: &EmbeddingTable, cap: usize, seed: u64) -> Self {
        let id = |i: usize| table.id(cache.candidate_rows()[i]).to_string();
        Self {
            format: FORMAT.into(),
            algorithm: coreset.algorithm.name().into(),
            epsilon_sq: coreset.epsilon_sq,
            satisfied: coreset.satisfied,
            stop_reason: coreset.stop.name().into(),
            kernel: KernelMeta {
                subsample_cap: cap,
                seed,
                components: coreset
                    .kernel
                    .iter()
                    .map(|c| ComponentMeta {
                        tag: c.tag.clone(),
                        bandwidth: c.bandwidth,
                    })
                    .collect(),
            },
            datasets: coreset.labels.clone(),
            support: coreset.ws.support.iter().map(|&i| id(i)).collect(),
            weights: coreset
                .labels
                .iter()
                .zip(&coreset.ws.weights)
                .map(|(l, w)| WeightRow {
                    dataset: l.clone(),
                    weights: w.clone(),
                })
                .collect(),
            mmd_sq: coreset.mmd_sq.clone(),
            trace: coreset
                .trace
                .iter()
                .enumerate()
                .map(|(m, r)| TraceEntry {
                    m: m + 1,
                    chosen: id(r.chosen),
                    beta: r.beta.clone(),
                    mmd_sq: r.mmd_sq.clone(),
                    elapsed_seconds: r.elapsed_seconds,
                })
                .collect(),
        }
    }

    /// The same file with every timing field zeroed, for run-to-run comparison.
    pub fn without_timing(mut self) -> Self {
        for e in &mut self.trace {
            e.elapsed_seconds = 0.0;
        }
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: Self = serde_json::from_str(&text).map_err(|e| Error::format(path, e.line() as u64, e.to_string()))?;
        if file.format != FORMAT {
            return Err(Error::format(path, 0, format!("unsupported format `{}`", file.format)));
        }
        if file.weights.len() != file.datasets.len()
            || file.weights.iter().zip(&file.datasets).any(|(w, d)| &w.dataset != d || w.weights.len() != file.support.len())
        {
            return Err(Error::format(path, 0, "weight rows do not match datasets and support"));
        }
        Ok(file)
    }

    pub fn kernel_model(&self) -> Result<KernelModel> {
        Ok(KernelModel::new(
            self.kernel
                .components
                .iter()
                .map(|c| KernelComponent {
                    bandwidth: c.bandwidth,
                    tag: c.tag.clone(),
                })
                .collect(),
        )?)
    }

    /// Resolve exemplar ids against a loaded table.
    pub fn shared_support(&self, table: &EmbeddingTable) -> Result<SharedSupport> {
        let rows = self
            .support
            .iter()
            .map(|id| {
                table
                    .find(id)
                    .ok_or_else(|| Error::Mismatch(format!("exemplar `{id}` is not in the manifest's table")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SharedSupport {
            labels: self.datasets.clone(),
            rows,
            weights: self.weights.iter().map(|w| w.weights.clone()).collect(),
        })
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "algorithm {}\nepsilon_sq {}\nexemplars {}\nsatisfied {}\nstop {}\n",
            self.algorithm,
            fmt_f64(self.epsilon_sq),
            self.support.len(),
            self.satisfied,
            self.stop_reason
        );
        if let Some(last) = self.trace.last() {
            s += &format!("selection_seconds {:.6}\n", last.elapsed_seconds);
        }
        for (d, m) in self.datasets.iter().zip(&self.mmd_sq) {
            s += &format!("mmd_sq {d} {}\n", fmt_f64(*m));
        }
        s
    }
}
