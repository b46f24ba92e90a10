//! Precomputed kernel quantities.
//!
//! Every fit and every MMD evaluation over a candidate-restricted coreset needs
//! only three things: the candidate gram block `K_UU`, the per-dataset mean
//! kernel vectors `mu_t[i] = (1/n_t) Σ_j k(x_tj, u_i)` and the per-dataset
//! self-interaction constants `c_t = (1/n_t²) Σ_ij k(x_ti, x_tj)`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::data::{DatasetCollection, EmbeddingTable};
use crate::error::{Error, Result};
use crate::kernels::KernelModel;
use crate::par::map_range;

#[derive(Debug, Clone, PartialEq)]
pub struct GramCache {
    kernel: KernelModel,
    labels: Vec<String>,
    sizes: Vec<usize>,
    candidate_rows: Vec<usize>,
    kuu: Vec<f64>,
    mu: Vec<Vec<f64>>,
    c: Vec<f64>,
}

/// Bytes needed for a cache over `n_u` candidates and `n_t` datasets.
pub fn footprint_bytes(n_u: usize, n_t: usize) -> usize {
    let f = core::mem::size_of::<f64>();
    n_u.saturating_mul(n_u)
        .saturating_add(n_t.saturating_mul(n_u))
        .saturating_add(n_t)
        .saturating_mul(f)
}

/// Sum by recursive halving; error grows as `O(log n)` rather than `O(n)`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

impl GramCache {
    /// Evaluates all gram quantities for `candidates` (table rows). Fails with
    /// [`Error::ResourceLimit`] before allocating when the footprint exceeds
    /// `memory_limit` bytes.
    pub fn build(
        kernel: &KernelModel,
        table: &EmbeddingTable,
        collection: &DatasetCollection,
        candidates: &[usize],
        memory_limit: Option<usize>,
    ) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::InvalidConfig("candidate pool is empty".into()));
        }
        if collection.is_empty() {
            return Err(Error::InvalidConfig("collection has no datasets".into()));
        }
        if let Some(&bad) = candidates.iter().find(|&&r| r >= table.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: table.len(),
            });
        }
        let n_u = candidates.len();
        let n_t = collection.len();
        if let Some(limit) = memory_limit {
            let required = footprint_bytes(n_u, n_t);
            if required > limit {
                return Err(Error::ResourceLimit { required, limit });
            }
        }

        let upper: Vec<Vec<f64>> = map_range(n_u, |i| {
            let ui = table.row(candidates[i]);
            candidates[i..]
                .iter()
                .map(|&r| kernel.eval(ui, table.row(r)))
                .collect()
        });
        let mut kuu = alloc::vec![0.0; n_u * n_u];
        for (i, row) in upper.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                let j = i + off;
                kuu[i * n_u + j] = v;
                kuu[j * n_u + i] = v;
            }
        }

        let mut mu = Vec::with_capacity(n_t);
        let mut c = Vec::with_capacity(n_t);
        for t in 0..n_t {
            let rows = collection.rows(t);
            let n = rows.len() as f64;
            let mu_t = map_range(n_u, |i| {
                let ui = table.row(candidates[i]);
                let terms: Vec<f64> = rows.iter().map(|&r| kernel.eval(table.row(r), ui)).collect();
                pairwise_sum(&terms) / n
            });
            let row_sums = map_range(rows.len(), |a| {
                let xa = table.row(rows[a]);
                let terms: Vec<f64> = rows.iter().map(|&r| kernel.eval(xa, table.row(r))).collect();
                pairwise_sum(&terms)
            });
            mu.push(mu_t);
            c.push(pairwise_sum(&row_sums) / (n * n));
        }

        Ok(Self {
            kernel: kernel.clone(),
            labels: collection.labels().to_vec(),
            sizes: (0..n_t).map(|t| collection.rows(t).len()).collect(),
            candidate_rows: candidates.to_vec(),
            kuu,
            mu,
            c,
        })
    }

    /// Assembles a cache from stored parts (for example a reloaded cache file).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        kernel: KernelModel,
        labels: Vec<String>,
        sizes: Vec<usize>,
        candidate_rows: Vec<usize>,
        kuu: Vec<f64>,
        mu: Vec<Vec<f64>>,
        c: Vec<f64>,
    ) -> Result<Self> {
        let n_u = candidate_rows.len();
        let n_t = labels.len();
        let bad = |what: &str| Err(Error::InvalidConfig(alloc::format!("gram parts: {what}")));
        if n_u == 0 || n_t == 0 {
            return bad("empty candidate pool or dataset list");
        }
        if kuu.len() != n_u * n_u {
            return bad("K_UU has the wrong size");
        }
        if sizes.len() != n_t || c.len() != n_t || mu.len() != n_t || mu.iter().any(|m| m.len() != n_u) {
            return bad("per-dataset arrays disagree in length");
        }
        if sizes.contains(&0) {
            return bad("dataset of size zero");
        }
        if kuu.iter().chain(mu.iter().flatten()).chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "gram parts".into(),
            });
        }
        Ok(Self {
            kernel,
            labels,
            sizes,
            candidate_rows,
            kuu,
            mu,
            c,
        })
    }

    pub fn kernel(&self) -> &KernelModel {
        &self.kernel
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_datasets(&self) -> usize {
        self.labels.len()
    }

    pub fn num_candidates(&self) -> usize {
        self.candidate_rows.len()
    }

    /// `n_t` for each dataset.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Table row of each candidate.
    pub fn candidate_rows(&self) -> &[usize] {
        &self.candidate_rows
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownDataset(label.into()))
    }

    #[inline]
    pub fn k(&self, i: usize, j: usize) -> f64 {
        self.kuu[i * self.candidate_rows.len() + j]
    }

    /// Row `i` of `K_UU`.
    #[inline]
    pub fn k_row(&self, i: usize) -> &[f64] {
        let n = self.candidate_rows.len();
        &self.kuu[i * n..(i + 1) * n]
    }

    /// Row-major `K_UU`.
    pub fn kuu(&self) -> &[f64] {
        &self.kuu
    }

    pub fn mu(&self, t: usize) -> &[f64] {
        &self.mu[t]
    }

    pub fn c(&self, t: usize) -> f64 {
        self.c[t]
    }

    pub fn c_all(&self) -> &[f64] {
        &self.c
    }
}
