//! Fitting dependent MMD coresets.
//!
//! All three algorithms grow one shared support from the candidate pool and
//! keep a probability weight row per dataset. They stop as soon as every
//! dataset satisfies `MMD² ≤ ε²` (satisficing), or when a budget runs out.
//!
//! * [`Algorithm::Dmmd`]: greedy selection with closed-form mixing weights.
//!   Old weights keep their ratios; only the mixing weight is chosen.
//! * [`Algorithm::DmmdOpt`]: as `Dmmd`, then every weight row is re-optimized
//!   over the simplex after each addition.
//! * [`Algorithm::Protodash`]: gradient-based selection, followed by full
//!   re-optimization of every weight row.
//!
//! Candidates are scored only over the datasets that are not yet satisfied,
//! but weights are updated for every dataset.

mod simplex;
mod step;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use simplex::{project_to_simplex, reoptimize_weights, ReoptConfig, ReoptOutcome};
pub use step::{
    greedy_step, mix_from_terms, optimal_mix, protodash_select, Mix, SelectionState, Step, BETA_MAX,
    DEGENERATE_DENOM,
};

use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::gram::GramCache;
use crate::kernels::KernelComponent;
use crate::mmd::WeightedSupport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Dmmd,
    DmmdOpt,
    Protodash,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Dmmd, Algorithm::DmmdOpt, Algorithm::Protodash];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dmmd => "dmmd",
            Algorithm::DmmdOpt => "dmmd-opt",
            Algorithm::Protodash => "protodash",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown algorithm `{s}` (expected dmmd, dmmd-opt or protodash)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub algorithm: Algorithm,
    pub epsilon_sq: f64,
    pub max_exemplars: usize,
    /// Wall-time budget in seconds, checked between iterations.
    pub max_seconds: f64,
    pub reopt: ReoptConfig,
    /// Keep every iteration's weight rows in the trace.
    pub record_weights: bool,
}

impl FitConfig {
    pub fn new(algorithm: Algorithm, epsilon_sq: f64) -> Self {
        Self {
            algorithm,
            epsilon_sq,
            max_exemplars: usize::MAX,
            max_seconds: f64::INFINITY,
            reopt: ReoptConfig::default(),
            record_weights: false,
        }
    }

    pub fn with_max_exemplars(mut self, m: usize) -> Self {
        self.max_exemplars = m;
        self
    }

    pub fn with_max_seconds(mut self, s: f64) -> Self {
        self.max_seconds = s;
        self
    }

    pub fn recording_weights(mut self) -> Self {
        self.record_weights = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_sq > 0.0 && self.epsilon_sq.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!("eps2 must be positive, got {}", self.epsilon_sq)));
        }
        if self.max_exemplars == 0 {
            return Err(Error::InvalidConfig("max exemplars must be at least 1".into()));
        }
        if self.max_seconds.is_nan() || self.max_seconds < 0.0 {
            return Err(Error::InvalidConfig("max seconds must be nonnegative".into()));
        }
        if self.reopt.max_iterations == 0 || self.reopt.tolerance.is_nan() || self.reopt.tolerance < 0.0 {
            return Err(Error::InvalidConfig("invalid weight optimizer settings".into()));
        }
        Ok(())
    }
}

/// Why a fit stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Satisfied,
    MaxExemplars,
    MaxSeconds,
    CandidatesExhausted,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Satisfied => "satisfied",
            StopReason::MaxExemplars => "max-exemplars",
            StopReason::MaxSeconds => "max-seconds",
            StopReason::CandidatesExhausted => "candidates-exhausted",
        }
    }
}

impl FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            StopReason::Satisfied,
            StopReason::MaxExemplars,
            StopReason::MaxSeconds,
            StopReason::CandidatesExhausted,
        ]
        .into_iter()
        .find(|r| r.name() == s)
        .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown stop reason `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Candidate index added in this iteration.
    pub chosen: usize,
    /// Weight the new exemplar received in each dataset before any
    /// re-optimization.
    pub beta: Vec<f64>,
    pub mmd_sq: Vec<f64>,
    pub elapsed_seconds: f64,
    pub weights: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependentCoreset {
    pub algorithm: Algorithm,
    pub labels: Vec<String>,
    pub kernel: Vec<KernelComponent>,
    pub epsilon_sq: f64,
    pub ws: WeightedSupport,
    pub mmd_sq: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    pub satisfied: bool,
    pub stop: StopReason,
}

impl DependentCoreset {
    pub fn len(&self) -> usize {
        self.ws.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ws.support.is_empty()
    }

    pub fn max_mmd_sq(&self) -> f64 {
        self.mmd_sq.iter().copied().fold(0.0, f64::max)
    }

    /// Table rows of the support, resolved through the cache.
    pub fn support_rows(&self, cache: &GramCache) -> Vec<usize> {
        self.ws.support.iter().map(|&i| cache.candidate_rows()[i]).collect()
    }
}

/// Runs the configured algorithm.
pub fn fit(cache: &GramCache, config: &FitConfig, clock: &dyn Clock) -> Result<DependentCoreset> {
    config.validate()?;
    let n_t = cache.num_datasets();
    let mut state = SelectionState::new(cache);
    let mut active = alloc::vec![true; n_t];
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut mmd_now: Vec<f64> = (0..n_t).map(|t| cache.c(t)).collect();

    let stop = loop {
        if !active.iter().any(|a| *a) {
            break StopReason::Satisfied;
        }
        if state.support().len() >= config.max_exemplars {
            break StopReason::MaxExemplars;
        }
        if !state.support().is_empty() && clock.elapsed_seconds() >= config.max_seconds {
            break StopReason::MaxSeconds;
        }
        let beta = match config.algorithm {
            Algorithm::Dmmd | Algorithm::DmmdOpt => {
                let Some(step) = greedy_step(&state, &active)? else {
                    break StopReason::CandidatesExhausted;
                };
                state.push_mixed(step.chosen, &step.beta);
                if config.algorithm == Algorithm::DmmdOpt {
                    reoptimize_all(cache, &mut state, &config.reopt)?;
                }
                step.beta
            }
            Algorithm::Protodash => {
                let Some(chosen) = protodash_select(&state, &active) else {
                    break StopReason::CandidatesExhausted;
                };
                state.push_zero(chosen);
                if state.support().len() > 1 {
                    reoptimize_all(cache, &mut state, &config.reopt)?;
                }
                (0..n_t).map(|t| *state.weights(t).last().expect("nonempty")).collect()
            }
        };
        mmd_now = (0..n_t).map(|t| state.mmd_sq(t)).collect::<Result<_>>()?;
        for (a, m) in active.iter_mut().zip(&mmd_now) {
            *a = *m > config.epsilon_sq;
        }
        trace.push(IterationRecord {
            chosen: *state.support().last().expect("just pushed"),
            beta,
            mmd_sq: mmd_now.clone(),
            elapsed_seconds: clock.elapsed_seconds(),
            weights: config.record_weights.then(|| state.snapshot().weights),
        });
    };

    Ok(DependentCoreset {
        algorithm: config.algorithm,
        labels: cache.labels().to_vec(),
        kernel: cache.kernel().components().to_vec(),
        epsilon_sq: config.epsilon_sq,
        ws: state.snapshot(),
        mmd_sq: mmd_now,
        trace,
        satisfied: stop == StopReason::Satisfied,
        stop,
    })
}

fn reoptimize_all(cache: &GramCache, state: &mut SelectionState<'_>, config: &ReoptConfig) -> Result<()> {
    for t in 0..cache.num_datasets() {
        let out = reoptimize_weights(cache, t, state.support(), state.weights(t), config)?;
        state.set_weights(t, out.weights);
    }
    Ok(())
}

pub fn fit_dmmd(cache: &GramCache, config: &FitConfig, clock: &dyn Clock) -> Result<DependentCoreset> {
    fit(cache, &FitConfig { algorithm: Algorithm::Dmmd, ..config.clone() }, clock)
}

pub fn fit_dmmd_opt(cache: &GramCache, config: &FitConfig, clock: &dyn Clock) -> Result<DependentCoreset> {
    fit(cache, &FitConfig { algorithm: Algorithm::DmmdOpt, ..config.clone() }, clock)
}

pub fn fit_protodash_dep(cache: &GramCache, config: &FitConfig, clock: &dyn Clock) -> Result<DependentCoreset> {
    fit(cache, &FitConfig { algorithm: Algorithm::Protodash, ..config.clone() }, clock)
}
