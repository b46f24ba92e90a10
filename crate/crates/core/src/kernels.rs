//! Additive squared-exponential kernel with median-heuristic bandwidths.
//!
//! Every component is `exp(-‖x−y‖² / (2h²))` with `h` the median pairwise
//! Euclidean distance of the points it is fitted to. The additive kernel is the
//! plain average of its components, so `k(x, x) = 1` and `0 < k ≤ 1`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::data::{DatasetCollection, EmbeddingTable};
use crate::error::{Error, Result};

/// Default cap on the number of points used for a median bandwidth.
pub const DEFAULT_SUBSAMPLE_CAP: usize = 2000;

/// Tag of the pooled component of an additive kernel.
pub const POOLED_TAG: &str = "all";

#[derive(Debug, Clone, PartialEq)]
pub struct KernelComponent {
    pub bandwidth: f64,
    /// `"all"` for the pooled component, otherwise a dataset label.
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    components: Vec<KernelComponent>,
    neg_inv_two_h2: Vec<f64>,
}

impl KernelModel {
    pub fn new(components: Vec<KernelComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidConfig("kernel needs at least one component".into()));
        }
        if let Some(c) = components.iter().find(|c| !(c.bandwidth > 0.0 && c.bandwidth.is_finite())) {
            return Err(Error::DegenerateBandwidth {
                label: c.tag.clone(),
                reason: alloc::format!("bandwidth {} is not positive and finite", c.bandwidth),
            });
        }
        let neg_inv_two_h2 = components
            .iter()
            .map(|c| -1.0 / (2.0 * c.bandwidth * c.bandwidth))
            .collect();
        Ok(Self {
            components,
            neg_inv_two_h2,
        })
    }

    /// Single squared-exponential component with bandwidth `h`.
    pub fn single(h: f64) -> Result<Self> {
        Self::new(alloc::vec![KernelComponent {
            bandwidth: h,
            tag: POOLED_TAG.to_string(),
        }])
    }

    pub fn components(&self) -> &[KernelComponent] {
        &self.components
    }

    /// Kernel value as a function of the squared distance.
    #[inline]
    pub fn eval_sq_dist(&self, d2: f64) -> f64 {
        let sum: f64 = self.neg_inv_two_h2.iter().map(|&c| libm::exp(c * d2)).sum();
        sum / self.neg_inv_two_h2.len() as f64
    }

    /// `k(x, y)`. Panics if the dimensions differ; use [`kernel_eval`] for a
    /// checked call.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), y.len(), "kernel arguments differ in dimension");
        self.eval_sq_dist(sq_dist(x, y))
    }
}

/// Checked `k(x, y)`.
pub fn kernel_eval(model: &KernelModel, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
            context: "kernel arguments".to_string(),
        });
    }
    Ok(model.eval(x, y))
}

#[inline]
pub fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Indices of the points a median bandwidth is computed from: all of `0..n`
/// when `n <= cap`, otherwise a seeded uniform subset of size `cap`, sorted.
pub fn subsample_indices(n: usize, cap: usize, seed: u64) -> Vec<usize> {
    if n <= cap {
        return (0..n).collect();
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, cap).into_vec();
    idx.sort_unstable();
    idx
}

/// Median pairwise Euclidean distance over at most `cap` of `points`.
///
/// With an even number of pairs the two middle distances are averaged.
pub fn median_bandwidth(points: &[&[f64]], cap: usize, seed: u64) -> Result<f64> {
    median_bandwidth_labeled(points, cap, seed, POOLED_TAG)
}

fn median_bandwidth_labeled(points: &[&[f64]], cap: usize, seed: u64, label: &str) -> Result<f64> {
    let degenerate = |reason: &str| Error::DegenerateBandwidth {
        label: label.to_string(),
        reason: reason.to_string(),
    };
    if cap < 2 {
        return Err(Error::InvalidConfig("subsample cap must be at least 2".into()));
    }
    if points.len() < 2 {
        return Err(degenerate("fewer than two points"));
    }
    let idx = subsample_indices(points.len(), cap, seed);
    let mut d = Vec::with_capacity(idx.len() * (idx.len() - 1) / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            d.push(libm::sqrt(sq_dist(points[i], points[j])));
        }
    }
    let odd = d.len() % 2 == 1;
    let mid = d.len() / 2;
    let (lower, upper_mid, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    let median = if odd {
        *upper_mid
    } else {
        let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (below + *upper_mid)
    };
    if median <= 0.0 {
        return Err(degenerate("median pairwise distance is zero"));
    }
    Ok(median)
}

/// Pooled component over all dataset rows followed by one component per
/// dataset, in collection order, each weighted `1/(|T|+1)`.
pub fn build_additive_kernel(
    table: &EmbeddingTable,
    collection: &DatasetCollection,
    cap: usize,
    seed: u64,
) -> Result<KernelModel> {
    let gather = |rows: &[usize]| -> Vec<&[f64]> { rows.iter().map(|&r| table.row(r)).collect() };
    let mut components = Vec::with_capacity(collection.len() + 1);
    let pooled = gather(&collection.union_rows());
    components.push(KernelComponent {
        bandwidth: median_bandwidth_labeled(&pooled, cap, seed, POOLED_TAG)?,
        tag: POOLED_TAG.to_string(),
    });
    for (t, label) in collection.labels().iter().enumerate() {
        let pts = gather(collection.rows(t));
        components.push(KernelComponent {
            bandwidth: median_bandwidth_labeled(&pts, cap, seed, label)?,
            tag: label.clone(),
        });
    }
    KernelModel::new(components)
}
