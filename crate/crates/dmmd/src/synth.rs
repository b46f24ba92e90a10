//! Synthetic fixtures written as self-contained manifest directories.
//!
//! Every sample is drawn from its own stream of the ChaCha20 generator keyed
//! by the user seed, so one seed fixes all files.

use std::path::{Path, PathBuf};

use dmmd_core::synthetic::presets;
use dmmd_core::{DatasetCollection, EmbeddingTable, MixtureSpec};
use serde_json::json;

use crate::error::Result;
use crate::manifest::{write_collection, write_json};

/// Attribute holding the mixture component of every generated row.
pub const COMPONENT_ATTRIBUTE: &str = "label";
pub const METADATA_FILE: &str = "metadata.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Two samples from three equally weighted Gaussians.
    Gauss3,
    /// Datasets `a` and `b` from eight Gaussians with mirrored weights, plus
    /// a balanced held-out candidate pool.
    Skewpair,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Gauss3 => "gauss3",
            Preset::Skewpair => "skewpair",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Synth {
    pub table: EmbeddingTable,
    pub collection: DatasetCollection,
    pub candidates: Vec<usize>,
    pub metadata: serde_json::Value,
}

struct Builder {
    table: EmbeddingTable,
    collection: DatasetCollection,
}

impl Builder {
    fn sample(&mut self, spec: &MixtureSpec, label: &str, n: usize, seed: u64, stream: u64) -> Result<Vec<usize>> {
        let s = spec.sample_stream(n, seed, stream)?;
        let mut rows = Vec::with_capacity(n);
        for (i, (p, k)) in s.points.iter().zip(&s.components).enumerate() {
            let row = self.table.push(format!("{label}:{i}"), p)?;
            self.collection.set_attribute(COMPONENT_ATTRIBUTE, row, k.to_string());
            rows.push(row);
        }
        Ok(rows)
    }
}

fn describe(spec: &MixtureSpec) -> serde_json::Value {
    spec.components()
        .iter()
        .map(|c| json!({"mean": c.mean, "covariance": c.covariance, "weight": c.weight}))
        .collect()
}

pub fn build(preset: Preset, n: usize, seed: u64) -> Result<Synth> {
    let mut b = Builder {
        table: EmbeddingTable::new(if preset == Preset::Gauss3 { 2 } else { presets::SKEW_COMPONENTS })?,
        collection: DatasetCollection::new(),
    };
    let (candidates, metadata) = match preset {
        Preset::Gauss3 => {
            let spec = presets::gauss3();
            for (t, label) in ["g1", "g2"].into_iter().enumerate() {
                let rows = b.sample(&spec, label, n, seed, t as u64 + 1)?;
                b.collection.add_dataset(&b.table, label, rows)?;
            }
            let meta = json!({
                "preset": preset.name(),
                "seed": seed,
                "n": n,
                "generator": "ChaCha20 keyed by seed; dataset g1 uses stream 1, g2 stream 2",
                "candidates": "union of g1 and g2",
                "mixture": describe(&spec),
            });
            (b.collection.union_rows(), meta)
        }
        Preset::Skewpair => {
            let (sa, sb, pool) = (presets::skew_a(), presets::skew_b(), presets::skew_balanced());
            let ra = b.sample(&sa, "a", n, seed, 1)?;
            b.collection.add_dataset(&b.table, "a", ra)?;
            let rb = b.sample(&sb, "b", n, seed, 2)?;
            b.collection.add_dataset(&b.table, "b", rb.clone())?;
            let held = b.sample(&pool, "pool", n, seed, 3)?;
            let meta = json!({
                "preset": preset.name(),
                "seed": seed,
                "n": n,
                "generator": "ChaCha20 keyed by seed; a uses stream 1, b stream 2, pool stream 3",
                "candidates": "rows of b followed by a held-out sample from the balanced mixture",
                "component_attribute": COMPONENT_ATTRIBUTE,
                "overweighted_in_a": [0, 1, 2, 3],
                "overweighted_in_b": [4, 5, 6, 7],
                "mixture_a": describe(&sa),
                "mixture_b": describe(&sb),
                "mixture_pool": describe(&pool),
            });
            (rb.into_iter().chain(held).collect(), meta)
        }
    };
    Ok(Synth {
        table: b.table,
        collection: b.collection,
        candidates,
        metadata,
    })
}

impl Synth {
    /// Write the manifest directory; returns the manifest path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let manifest = write_collection(dir, &self.table, &self.collection, &self.candidates)?;
        write_json(&dir.join(METADATA_FILE), &self.metadata)?;
        Ok(manifest)
    }
}
