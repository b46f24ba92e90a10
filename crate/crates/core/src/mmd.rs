//! Empirical MMD², loss and witness function over cached gram quantities.
//!
//! For a dataset `X_t` and `Q_t = Σ_j w_j δ_{u_j}`:
//!
//! ```text
//! MMD²(X_t, Q_t) = c_t + wᵀ K_SS w − 2 wᵀ mu_t[S]
//! loss_t(Q_t)    = ½ wᵀ K_SS w − wᵀ mu_t[S]         (so MMD² = c_t + 2·loss)
//! witness_t(x)   = (1/n_t) Σ_i k(x, x_ti) − Σ_j w_j k(x, u_j)
//! ```

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gram::GramCache;
use crate::kernels::KernelModel;

/// Tolerance on the sum of a weight row.
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Negative MMD² values down to `-MMD_CLAMP_TOL` are treated as roundoff.
pub const MMD_CLAMP_TOL: f64 = 1e-9;

/// Shared support over candidate indices with one weight row per dataset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedSupport {
    pub support: Vec<usize>,
    /// `weights[t][j]` is the weight of `support[j]` in dataset `t`.
    pub weights: Vec<Vec<f64>>,
}

impl WeightedSupport {
    pub fn empty(num_datasets: usize) -> Self {
        Self {
            support: Vec::new(),
            weights: alloc::vec![Vec::new(); num_datasets],
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Checks index range, distinct support, and that every nonempty weight row
    /// lies on the probability simplex.
    pub fn validate(&self, cache: &GramCache) -> Result<()> {
        check_support(cache, &self.support)?;
        if self.weights.len() != cache.num_datasets() {
            return Err(Error::InvalidWeights(format!(
                "{} weight rows for {} datasets",
                self.weights.len(),
                cache.num_datasets()
            )));
        }
        for (t, w) in self.weights.iter().enumerate() {
            check_row(w, self.support.len()).map_err(|e| match e {
                Error::InvalidWeights(m) => Error::InvalidWeights(format!("dataset {t}: {m}")),
                other => other,
            })?;
            if !w.is_empty() {
                let total: f64 = w.iter().sum();
                if libm::fabs(total - 1.0) > SIMPLEX_TOL {
                    return Err(Error::InvalidWeights(format!("dataset {t}: weights sum to {total}")));
                }
            }
        }
        Ok(())
    }
}

fn check_support(cache: &GramCache, support: &[usize]) -> Result<()> {
    let n = cache.num_candidates();
    let mut seen = alloc::vec![false; n];
    for &i in support {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        if core::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidWeights(format!("candidate {i} appears twice in the support")));
        }
    }
    Ok(())
}

fn check_row(w: &[f64], len: usize) -> Result<()> {
    if w.len() != len {
        return Err(Error::InvalidWeights(format!("{} weights for {} exemplars", w.len(), len)));
    }
    if let Some(v) = w.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidWeights(format!("weight {v} is negative or not finite")));
    }
    Ok(())
}

fn check(cache: &GramCache, t: usize, support: &[usize], w: &[f64]) -> Result<()> {
    if t >= cache.num_datasets() {
        return Err(Error::IndexOutOfRange {
            index: t,
            len: cache.num_datasets(),
        });
    }
    check_support(cache, support)?;
    check_row(w, support.len())
}

/// `wᵀ K_SS w`.
pub fn quadratic(cache: &GramCache, support: &[usize], w: &[f64]) -> f64 {
    support
        .iter()
        .zip(w)
        .map(|(&i, &wi)| {
            let row = cache.k_row(i);
            wi * support.iter().zip(w).map(|(&j, &wj)| wj * row[j]).sum::<f64>()
        })
        .sum()
}

/// `wᵀ mu_t[S]`.
pub fn linear(cache: &GramCache, t: usize, support: &[usize], w: &[f64]) -> f64 {
    let mu = cache.mu(t);
    support.iter().zip(w).map(|(&i, &wi)| wi * mu[i]).sum()
}

/// MMD² before clamping.
pub fn mmd_sq_raw(cache: &GramCache, t: usize, support: &[usize], w: &[f64]) -> Result<f64> {
    check(cache, t, support, w)?;
    Ok(cache.c(t) + quadratic(cache, support, w) - 2.0 * linear(cache, t, support, w))
}

/// Maps roundoff negatives to zero; anything below `-MMD_CLAMP_TOL` is an error.
pub fn clamp_mmd(v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -MMD_CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::NumericalIntegrity { value: v })
    }
}

pub fn mmd_sq(cache: &GramCache, t: usize, support: &[usize], w: &[f64]) -> Result<f64> {
    clamp_mmd(mmd_sq_raw(cache, t, support, w)?)
}

pub fn loss(cache: &GramCache, t: usize, support: &[usize], w: &[f64]) -> Result<f64> {
    check(cache, t, support, w)?;
    Ok(0.5 * quadratic(cache, support, w) - linear(cache, t, support, w))
}

/// Witness at candidate `i`: `mu_t[i] − Σ_j w_j K[i, S_j]`.
pub fn witness_candidate(cache: &GramCache, t: usize, i: usize, support: &[usize], w: &[f64]) -> Result<f64> {
    check(cache, t, support, w)?;
    if i >= cache.num_candidates() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: cache.num_candidates(),
        });
    }
    let row = cache.k_row(i);
    Ok(cache.mu(t)[i] - support.iter().zip(w).map(|(&j, &wj)| wj * row[j]).sum::<f64>())
}

/// Witness at an arbitrary point, evaluated directly from the kernel.
pub fn witness_point(
    kernel: &KernelModel,
    dataset: &[&[f64]],
    exemplars: &[&[f64]],
    w: &[f64],
    query: &[f64],
) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset("witness".into()));
    }
    check_row(w, exemplars.len())?;
    for p in dataset.iter().chain(exemplars) {
        if p.len() != query.len() {
            return Err(Error::DimensionMismatch {
                expected: query.len(),
                found: p.len(),
                context: "witness query".into(),
            });
        }
    }
    let terms: Vec<f64> = dataset.iter().map(|x| kernel.eval(query, x)).collect();
    let data_term = crate::gram::pairwise_sum(&terms) / dataset.len() as f64;
    let model_term: f64 = exemplars.iter().zip(w).map(|(u, wj)| wj * kernel.eval(query, u)).sum();
    Ok(data_term - model_term)
}
