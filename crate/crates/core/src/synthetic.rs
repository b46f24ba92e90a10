//! Seeded Gaussian mixture fixtures.
//!
//! Draws come from ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`), a
//! counter-based stream cipher generator, so a seed identifies the same stream
//! in any implementation of ChaCha20. Each draw consumes one uniform `f64` for
//! the component followed by `d` standard normals (ziggurat, `rand_distr`).

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub mean: Vec<f64>,
    /// Row-major `d × d` covariance.
    pub covariance: Vec<f64>,
    pub weight: f64,
}

/// A validated Gaussian mixture: weights sum to one, covariances are
/// symmetric positive definite.
#[derive(Debug, Clone)]
pub struct MixtureSpec {
    dim: usize,
    components: Vec<MixtureComponent>,
    factors: Vec<DMatrix<f64>>,
}

/// Points drawn from a mixture with the component each came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSample {
    pub points: Vec<Vec<f64>>,
    pub components: Vec<usize>,
}

impl MixtureSpec {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidMixture("no components".into()))?;
        let dim = first.mean.len();
        if dim == 0 {
            return Err(Error::InvalidMixture("zero-dimensional mean".into()));
        }
        let mut total = 0.0;
        let mut factors = Vec::with_capacity(components.len());
        for (k, c) in components.iter().enumerate() {
            if c.mean.len() != dim || c.covariance.len() != dim * dim {
                return Err(Error::InvalidMixture(format!("component {k}: shape does not match dimension {dim}")));
            }
            if !(c.weight >= 0.0 && c.weight.is_finite()) {
                return Err(Error::InvalidMixture(format!("component {k}: weight {} is not a nonnegative number", c.weight)));
            }
            if c.mean.iter().chain(&c.covariance).any(|v| !v.is_finite()) {
                return Err(Error::InvalidMixture(format!("component {k}: non-finite parameter")));
            }
            let cov = DMatrix::from_row_slice(dim, dim, &c.covariance);
            if cov != cov.transpose() {
                return Err(Error::InvalidMixture(format!("component {k}: covariance is not symmetric")));
            }
            let chol = cov
                .cholesky()
                .ok_or_else(|| Error::InvalidMixture(format!("component {k}: covariance is not positive definite")))?;
            factors.push(chol.l());
            total += c.weight;
        }
        if libm::fabs(total - 1.0) > 1e-12 {
            return Err(Error::InvalidMixture(format!("weights sum to {total}, not 1")));
        }
        Ok(Self {
            dim,
            components,
            factors,
        })
    }

    /// Equal weights, isotropic covariance `variance · I`.
    pub fn isotropic(means: &[Vec<f64>], variance: f64) -> Result<Self> {
        let w = 1.0 / means.len() as f64;
        Self::weighted_isotropic(means, &alloc::vec![w; means.len()], variance)
    }

    pub fn weighted_isotropic(means: &[Vec<f64>], weights: &[f64], variance: f64) -> Result<Self> {
        if means.len() != weights.len() {
            return Err(Error::InvalidMixture("means and weights differ in length".into()));
        }
        let comps = means
            .iter()
            .zip(weights)
            .map(|(m, &w)| {
                let d = m.len();
                let mut cov = alloc::vec![0.0; d * d];
                for i in 0..d {
                    cov[i * d + i] = variance;
                }
                MixtureComponent {
                    mean: m.clone(),
                    covariance: cov,
                    weight: w,
                }
            })
            .collect();
        Self::new(comps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// `n` i.i.d. draws; identical for identical `(spec, n, seed)`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<MixtureSample> {
        self.sample_stream(n, seed, 0)
    }

    /// Draws from stream `stream` of the ChaCha20 generator keyed by `seed`.
    /// Distinct streams under one seed are independent sequences.
    pub fn sample_stream(&self, n: usize, seed: u64, stream: u64) -> Result<MixtureSample> {
        if n == 0 {
            return Err(Error::InvalidConfig("sample size must be at least 1".into()));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut points = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let k = self.pick_component(rng.random::<f64>());
            let z = DVector::from_iterator(self.dim, (0..self.dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let x = &self.factors[k] * z;
            points.push(
                self.components[k]
                    .mean
                    .iter()
                    .zip(x.iter())
                    .map(|(m, e)| m + e)
                    .collect(),
            );
            labels.push(k);
        }
        Ok(MixtureSample {
            points,
            components: labels,
        })
    }

    fn pick_component(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (k, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                return k;
            }
        }
        // u landed in the rounding gap above the last cumulative weight
        self.components
            .iter()
            .rposition(|c| c.weight > 0.0)
            .unwrap_or(self.components.len() - 1)
    }
}

/// Named fixtures used by the CLI `synth` subcommand and the test suites.
pub mod presets {
    use super::*;

    /// Three equally weighted 2-D Gaussians with means (0,0), (4,0), (2,3.5)
    /// and covariance 0.6·I.
    pub fn gauss3() -> MixtureSpec {
        MixtureSpec::isotropic(&[alloc::vec![0.0, 0.0], alloc::vec![4.0, 0.0], alloc::vec![2.0, 3.5]], 0.6)
            .expect("preset is valid")
    }

    /// Number of components in the skewed-pair fixtures.
    pub const SKEW_COMPONENTS: usize = 8;

    /// Per-axis offset of the skewed-pair component means.
    pub const SKEW_SCALE: f64 = 4.0;

    /// Means of the skewed-pair components: `SKEW_SCALE · e_k` in eight
    /// dimensions, so every pair of components is equally far apart.
    pub fn skew_means() -> Vec<Vec<f64>> {
        (0..SKEW_COMPONENTS)
            .map(|k| {
                let mut m = alloc::vec![0.0; SKEW_COMPONENTS];
                m[k] = SKEW_SCALE;
                m
            })
            .collect()
    }

    /// Component weights proportional to `8, 7, …, 1` (skewed to early
    /// components) when `reversed` is false, `1, 2, …, 8` otherwise.
    pub fn skew_weights(reversed: bool) -> Vec<f64> {
        let n = SKEW_COMPONENTS;
        let total = (n * (n + 1) / 2) as f64;
        (0..n)
            .map(|k| {
                let rank = if reversed { k + 1 } else { n - k };
                rank as f64 / total
            })
            .collect()
    }

    /// Dataset `a` of the skewed pair (early components overweighted).
    pub fn skew_a() -> MixtureSpec {
        MixtureSpec::weighted_isotropic(&skew_means(), &skew_weights(false), 0.5).expect("preset is valid")
    }

    /// Dataset `b` of the skewed pair (late components overweighted).
    pub fn skew_b() -> MixtureSpec {
        MixtureSpec::weighted_isotropic(&skew_means(), &skew_weights(true), 0.5).expect("preset is valid")
    }

    /// Balanced mixture used for the held-out candidate pool of the skewed pair.
    pub fn skew_balanced() -> MixtureSpec {
        MixtureSpec::isotropic(&skew_means(), 0.5).expect("preset is valid")
    }
}
