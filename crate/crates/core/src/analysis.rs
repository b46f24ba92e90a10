//! Reading fitted dependent coresets: criticisms, cross-dataset weight ratios,
//! weights grouped by a categorical attribute and weighted attribute moments.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::data::{DatasetCollection, EmbeddingTable};
use crate::error::{Error, Result};
use crate::gram::{pairwise_sum, GramCache};
use crate::kernels::KernelModel;
use crate::par::map_range;
use crate::selection::DependentCoreset;

/// Weights below this are treated as zero when forming ratios.
pub const ZERO_WEIGHT: f64 = 1e-15;

/// Exemplars as table rows plus one weight row per dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedSupport {
    pub labels: Vec<String>,
    pub rows: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
}

impl SharedSupport {
    pub fn from_coreset(coreset: &DependentCoreset, cache: &GramCache) -> Self {
        Self {
            labels: coreset.labels.clone(),
            rows: coreset.support_rows(cache),
            weights: coreset.ws.weights.clone(),
        }
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownDataset(label.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Criticism {
    pub row: usize,
    pub witness: f64,
}

/// Dataset points ranked by witness value, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticismSet {
    pub label: String,
    pub entries: Vec<Criticism>,
}

/// Witness value of every point of dataset `label`, in dataset order. Both
/// terms are summed the same way, so the empirical measure of the dataset
/// (its rows in order, each weighted `1/n`) gives exactly zero everywhere.
pub fn dataset_witness(
    kernel: &KernelModel,
    table: &EmbeddingTable,
    collection: &DatasetCollection,
    support: &SharedSupport,
    label: &str,
) -> Result<Vec<f64>> {
    let rows = collection.rows_of(label)?;
    let w = &support.weights[support.position(label)?];
    if w.len() != support.rows.len() {
        return Err(Error::InvalidWeights(format!("{} weights for {} exemplars", w.len(), support.rows.len())));
    }
    let inv_n = 1.0 / rows.len() as f64;
    Ok(map_range(rows.len(), |a| {
        let x = table.row(rows[a]);
        let data: Vec<f64> = rows.iter().map(|&r| kernel.eval(x, table.row(r)) * inv_n).collect();
        let model: Vec<f64> = support
            .rows
            .iter()
            .zip(w)
            .map(|(&u, &wu)| wu * kernel.eval(x, table.row(u)))
            .collect();
        pairwise_sum(&data) - pairwise_sum(&model)
    }))
}

/// The `k` points of dataset `label` with the largest witness values. Ties go
/// to the lower table row.
pub fn criticisms(
    kernel: &KernelModel,
    table: &EmbeddingTable,
    collection: &DatasetCollection,
    support: &SharedSupport,
    label: &str,
    k: usize,
) -> Result<CriticismSet> {
    let rows = collection.rows_of(label)?;
    if k == 0 || k > rows.len() {
        return Err(Error::InvalidConfig(format!(
            "criticism count {k} must be between 1 and the dataset size {}",
            rows.len()
        )));
    }
    let values = dataset_witness(kernel, table, collection, support, label)?;
    let mut ranked: Vec<Criticism> = rows
        .iter()
        .zip(values)
        .map(|(&row, witness)| Criticism { row, witness })
        .collect();
    ranked.sort_by(|a, b| b.witness.total_cmp(&a.witness).then(a.row.cmp(&b.row)));
    ranked.truncate(k);
    Ok(CriticismSet {
        label: label.to_string(),
        entries: ranked,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioClass {
    /// `f > upper`: much more representative of `b`.
    OverB,
    /// `f < lower`: much more representative of `a`.
    OverA,
    Balanced,
}

impl RatioClass {
    pub fn name(self) -> &'static str {
        match self {
            RatioClass::OverB => "over-b",
            RatioClass::OverA => "over-a",
            RatioClass::Balanced => "balanced",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioEntry {
    /// Position in the support.
    pub exemplar: usize,
    pub row: usize,
    pub w_a: f64,
    pub w_b: f64,
    /// `w_b / w_a`; `None` when `w_a` is zero.
    pub ratio: Option<f64>,
    pub class: RatioClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub a: String,
    pub b: String,
    pub upper: f64,
    pub lower: f64,
    /// Exemplars with both weights zero are left out.
    pub entries: Vec<RatioEntry>,
}

impl RatioReport {
    pub fn over_b(&self) -> impl Iterator<Item = &RatioEntry> {
        self.entries.iter().filter(|e| e.class == RatioClass::OverB)
    }

    pub fn over_a(&self) -> impl Iterator<Item = &RatioEntry> {
        self.entries.iter().filter(|e| e.class == RatioClass::OverA)
    }
}

/// Classifies exemplars by `f_i = w_{b,i} / w_{a,i}`.
pub fn weight_ratio(support: &SharedSupport, a: &str, b: &str, upper: f64, lower: f64) -> Result<RatioReport> {
    if !(lower > 0.0 && upper > lower && upper.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ratio thresholds need upper > lower > 0, got {upper} and {lower}"
        )));
    }
    let wa = &support.weights[support.position(a)?];
    let wb = &support.weights[support.position(b)?];
    let mut entries = Vec::new();
    for (i, (&x, &y)) in wa.iter().zip(wb).enumerate() {
        let a_zero = x <= ZERO_WEIGHT;
        let b_zero = y <= ZERO_WEIGHT;
        if a_zero && b_zero {
            continue;
        }
        let (ratio, class) = if a_zero {
            (None, RatioClass::OverB)
        } else {
            let f = y / x;
            let class = if f > upper {
                RatioClass::OverB
            } else if f < lower {
                RatioClass::OverA
            } else {
                RatioClass::Balanced
            };
            (Some(f), class)
        };
        entries.push(RatioEntry {
            exemplar: i,
            row: support.rows[i],
            w_a: x,
            w_b: y,
            ratio,
            class,
        });
    }
    Ok(RatioReport {
        a: a.to_string(),
        b: b.to_string(),
        upper,
        lower,
        entries,
    })
}

/// Per-dataset weight mass of each categorical group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedWeights {
    /// Group values in order of first appearance in the support.
    pub groups: Vec<String>,
    pub labels: Vec<String>,
    /// `mass[t][g]`.
    pub mass: Vec<Vec<f64>>,
}

pub fn grouped_weights(
    table: &EmbeddingTable,
    collection: &DatasetCollection,
    support: &SharedSupport,
    attribute: &str,
) -> Result<GroupedWeights> {
    let values = collection.categorical(table, attribute, &support.rows)?;
    let mut groups: Vec<String> = Vec::new();
    let mut group_of = Vec::with_capacity(values.len());
    for v in values {
        let g = match groups.iter().position(|x| x == v) {
            Some(g) => g,
            None => {
                groups.push(v.to_string());
                groups.len() - 1
            }
        };
        group_of.push(g);
    }
    let mass = support
        .weights
        .iter()
        .map(|w| {
            let mut m = alloc::vec![0.0; groups.len()];
            for (&g, &wi) in group_of.iter().zip(w) {
                m[g] += wi;
            }
            m
        })
        .collect();
    Ok(GroupedWeights {
        groups,
        labels: support.labels.clone(),
        mass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub sd: f64,
}

/// Weighted mean and standard deviation of a numeric attribute under each
/// dataset's weights. Deviations are taken from the first positively weighted
/// exemplar, so a constant attribute gives exactly zero spread.
pub fn weighted_attribute_moments(
    table: &EmbeddingTable,
    collection: &DatasetCollection,
    support: &SharedSupport,
    attribute: &str,
) -> Result<Vec<Moments>> {
    let values = collection.numeric(table, attribute, &support.rows)?;
    support
        .weights
        .iter()
        .zip(&support.labels)
        .map(|(w, label)| {
            let total: f64 = w.iter().sum();
            let pivot = w
                .iter()
                .position(|&x| x > 0.0)
                .map(|i| values[i])
                .ok_or_else(|| Error::InvalidWeights(format!("dataset `{label}` has no positive weight")))?;
            let shift: f64 = w.iter().zip(&values).map(|(wi, a)| wi * (a - pivot)).sum::<f64>() / total;
            let mean = pivot + shift;
            let var: f64 = w
                .iter()
                .zip(&values)
                .map(|(wi, a)| {
                    let d = (a - pivot) - shift;
                    wi * d * d
                })
                .sum::<f64>()
                / total;
            Ok(Moments {
                mean,
                sd: libm::sqrt(var),
            })
        })
        .collect()
}
