use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gram::GramCache;
use crate::mmd::{self, WeightedSupport};
use crate::par::map_range;

/// Largest mixing weight given to a new exemplar.
pub const BETA_MAX: f64 = 1.0 - 1e-9;
/// Mixing denominators below this are treated as zero.
pub const DEGENERATE_DENOM: f64 = 1e-14;

/// Result of mixing one candidate into a dataset's coreset,
/// `Q' = (1−β) Q + β δ_u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mix {
    pub beta: f64,
    /// Loss of the mixed measure.
    pub loss: f64,
    /// The candidate's feature map coincides with the current mean embedding;
    /// `beta` is 0 and the loss is unchanged.
    pub degenerate: bool,
}

/// Line search in closed form.
///
/// With `A = wᵀKw`, `b = Σ w_j k(u_j, u)`, `m = mu_t[u]`, `p = wᵀmu_t[S]`,
/// the mixed loss is
/// `½((1−β)²A + 2β(1−β)b + β²k(u,u)) − (1−β)p − βm`, minimized at
/// `β = (A − b + m − p) / (A − 2b + k(u,u))`, clamped to `[0, BETA_MAX]`.
/// The denominator is `‖μ_Q − Φ(u)‖²`.
pub fn mix_from_terms(a: f64, b: f64, m: f64, p: f64, kuu: f64) -> Mix {
    let denom = a - 2.0 * b + kuu;
    if denom < DEGENERATE_DENOM {
        return Mix {
            beta: 0.0,
            loss: 0.5 * a - p,
            degenerate: true,
        };
    }
    let beta = ((a - b + m - p) / denom).clamp(0.0, BETA_MAX);
    Mix {
        beta,
        loss: mixed_loss(a, b, m, p, kuu, beta),
        degenerate: false,
    }
}

#[inline]
fn mixed_loss(a: f64, b: f64, m: f64, p: f64, kuu: f64, beta: f64) -> f64 {
    let s = 1.0 - beta;
    0.5 * (s * s * a + 2.0 * beta * s * b + beta * beta * kuu) - (s * p + beta * m)
}

/// Best mixing weight of `candidate` into dataset `t`'s measure
/// `Σ_j w_j δ_{support_j}`, computed from the cache.
pub fn optimal_mix(cache: &GramCache, t: usize, support: &[usize], w: &[f64], candidate: usize) -> Result<Mix> {
    mmd::loss(cache, t, support, w)?;
    if candidate >= cache.num_candidates() {
        return Err(Error::IndexOutOfRange {
            index: candidate,
            len: cache.num_candidates(),
        });
    }
    let a = mmd::quadratic(cache, support, w);
    let p = mmd::linear(cache, t, support, w);
    let row = cache.k_row(candidate);
    let b: f64 = support.iter().zip(w).map(|(&j, &wj)| wj * row[j]).sum();
    Ok(mix_from_terms(a, b, cache.mu(t)[candidate], p, cache.k(candidate, candidate)))
}

/// Mutable fitting state: the shared support, one weight row per dataset and,
/// per dataset, `kw[i] = Σ_j w_j K[i, S_j]` over all candidates.
#[derive(Debug, Clone)]
pub struct SelectionState<'a> {
    cache: &'a GramCache,
    support: Vec<usize>,
    in_support: Vec<bool>,
    weights: Vec<Vec<f64>>,
    kw: Vec<Vec<f64>>,
    quad: Vec<f64>,
    lin: Vec<f64>,
}

/// Outcome of one greedy selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub chosen: usize,
    /// Weight given to the new exemplar in each dataset.
    pub beta: Vec<f64>,
}

impl<'a> SelectionState<'a> {
    pub fn new(cache: &'a GramCache) -> Self {
        let n_t = cache.num_datasets();
        let n_u = cache.num_candidates();
        Self {
            cache,
            support: Vec::new(),
            in_support: alloc::vec![false; n_u],
            weights: alloc::vec![Vec::new(); n_t],
            kw: alloc::vec![alloc::vec![0.0; n_u]; n_t],
            quad: alloc::vec![0.0; n_t],
            lin: alloc::vec![0.0; n_t],
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self, t: usize) -> &[f64] {
        &self.weights[t]
    }

    pub fn contains(&self, i: usize) -> bool {
        self.in_support[i]
    }

    pub fn snapshot(&self) -> WeightedSupport {
        WeightedSupport {
            support: self.support.clone(),
            weights: self.weights.clone(),
        }
    }

    /// Current loss of dataset `t`.
    pub fn loss(&self, t: usize) -> f64 {
        0.5 * self.quad[t] - self.lin[t]
    }

    pub fn mmd_sq(&self, t: usize) -> Result<f64> {
        mmd::mmd_sq(self.cache, t, &self.support, &self.weights[t])
    }

    pub fn has_unchosen(&self) -> bool {
        self.support.len() < self.in_support.len()
    }

    /// Mixing `candidate` into dataset `t` using the maintained sums.
    pub fn mix(&self, t: usize, candidate: usize) -> Mix {
        let kuu = self.cache.k(candidate, candidate);
        let m = self.cache.mu(t)[candidate];
        if self.support.is_empty() {
            return mix_from_terms(0.0, 0.0, m, 0.0, kuu);
        }
        mix_from_terms(self.quad[t], self.kw[t][candidate], m, self.lin[t], kuu)
    }

    /// Score used for greedy selection: the dataset's loss after the candidate
    /// is added. The first exemplar always receives weight 1.
    fn score(&self, t: usize, candidate: usize) -> (f64, bool) {
        if self.support.is_empty() {
            let kuu = self.cache.k(candidate, candidate);
            return (0.5 * kuu - self.cache.mu(t)[candidate], false);
        }
        let mix = self.mix(t, candidate);
        (mix.loss, mix.degenerate)
    }

    /// Appends `candidate`, scaling existing weights by `1−β_t` and giving the
    /// new exemplar `β_t`; the first exemplar gets weight 1 everywhere.
    pub fn push_mixed(&mut self, candidate: usize, beta: &[f64]) {
        let first = self.support.is_empty();
        self.support.push(candidate);
        self.in_support[candidate] = true;
        let krow = self.cache.k_row(candidate);
        #[allow(clippy::needless_range_loop)]
        for t in 0..self.weights.len() {
            let b = if first { 1.0 } else { beta[t] };
            let keep = 1.0 - b;
            for w in &mut self.weights[t] {
                *w *= keep;
            }
            self.weights[t].push(b);
            for (acc, &k) in self.kw[t].iter_mut().zip(krow) {
                *acc = keep * *acc + b * k;
            }
            self.refresh_sums(t);
        }
    }

    /// Appends `candidate` with zero weight in every dataset.
    pub fn push_zero(&mut self, candidate: usize) {
        if self.support.is_empty() {
            self.push_mixed(candidate, &[]);
            return;
        }
        self.support.push(candidate);
        self.in_support[candidate] = true;
        for w in &mut self.weights {
            w.push(0.0);
        }
    }

    /// Replaces dataset `t`'s weights and rebuilds its maintained sums.
    pub fn set_weights(&mut self, t: usize, w: Vec<f64>) {
        debug_assert_eq!(w.len(), self.support.len());
        let cache = self.cache;
        let support = &self.support;
        for (i, acc) in self.kw[t].iter_mut().enumerate() {
            let row = cache.k_row(i);
            *acc = support.iter().zip(&w).map(|(&j, &wj)| wj * row[j]).sum();
        }
        self.weights[t] = w;
        self.refresh_sums(t);
    }

    fn refresh_sums(&mut self, t: usize) {
        let kw = &self.kw[t];
        self.quad[t] = self
            .support
            .iter()
            .zip(&self.weights[t])
            .map(|(&j, &wj)| wj * kw[j])
            .sum();
        self.lin[t] = mmd::linear(self.cache, t, &self.support, &self.weights[t]);
    }

    /// `Σ_{t∈active} (kw_t[i] − mu_t[i])`: the summed loss gradient along a new
    /// exemplar's weight coordinate.
    fn gradient_score(&self, active: &[bool], i: usize) -> f64 {
        active
            .iter()
            .enumerate()
            .filter(|(_, a)| **a)
            .map(|(t, _)| self.kw[t][i] - self.cache.mu(t)[i])
            .sum()
    }
}

fn argmin_by_index(scores: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(v) = *s {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// One `dmmd` selection: the unchosen candidate minimizing the summed mixed
/// loss over the active datasets (lowest index on ties), with every dataset's
/// own optimal mixing weight. Returns `Ok(None)` when no candidate is left.
/// The state is not modified.
pub fn greedy_step(state: &SelectionState<'_>, active: &[bool]) -> Result<Option<Step>> {
    if !active.iter().any(|a| *a) {
        return Err(Error::InvalidConfig("greedy step needs at least one active dataset".into()));
    }
    if !state.has_unchosen() {
        return Ok(None);
    }
    let n_u = state.cache.num_candidates();
    let scored: Vec<Option<(f64, bool)>> = map_range(n_u, |i| {
        if state.contains(i) {
            return None;
        }
        let mut total = 0.0;
        let mut all_degenerate = true;
        for (t, _) in active.iter().enumerate().filter(|(_, a)| **a) {
            let (loss, degenerate) = state.score(t, i);
            total += loss;
            all_degenerate &= degenerate;
        }
        Some((total, all_degenerate))
    });
    if scored.iter().flatten().all(|(_, degenerate)| *degenerate) {
        return Err(Error::Stall {
            support_len: state.support().len(),
            active: active.iter().filter(|a| **a).count(),
        });
    }
    let scores: Vec<Option<f64>> = scored.iter().map(|s| s.map(|(v, _)| v)).collect();
    let chosen = argmin_by_index(&scores).expect("an unchosen candidate exists");
    let beta = (0..state.cache.num_datasets())
        .map(|t| if state.support.is_empty() { 1.0 } else { state.mix(t, chosen).beta })
        .collect();
    Ok(Some(Step { chosen, beta }))
}

/// One dependent `protodash` selection. With an empty support the candidate
/// with the largest pooled mean similarity `Σ_t mu_t[i]` is chosen; afterwards
/// the candidate with the most negative summed loss gradient over the active
/// datasets. Lowest index on ties.
pub fn protodash_select(state: &SelectionState<'_>, active: &[bool]) -> Option<usize> {
    if !state.has_unchosen() {
        return None;
    }
    let cache = state.cache;
    let first = state.support.is_empty();
    let scores: Vec<Option<f64>> = map_range(cache.num_candidates(), |i| {
        if state.contains(i) {
            None
        } else if first {
            Some(-(0..cache.num_datasets()).map(|t| cache.mu(t)[i]).sum::<f64>())
        } else {
            Some(state.gradient_score(active, i))
        }
    });
    argmin_by_index(&scores)
}
