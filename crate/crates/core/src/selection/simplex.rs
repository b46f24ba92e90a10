//! Weight re-optimization on the probability simplex.
//!
//! Minimizes `½ wᵀ K_SS w − wᵀ mu_t[S]` over `{w ≥ 0, Σ w = 1}` with
//! accelerated projected gradient (step `1/L`, `L` the largest absolute row
//! sum of `K_SS`), restarting the momentum whenever the objective goes up.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gram::GramCache;
use crate::mmd;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReoptConfig {
    pub max_iterations: usize,
    /// Stop once the projected-gradient norm falls to this value.
    pub tolerance: f64,
}

impl Default for ReoptConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReoptOutcome {
    /// Lowest-loss iterate seen, starting point included.
    pub weights: Vec<f64>,
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

struct Quadratic {
    k: Vec<f64>,
    m: Vec<f64>,
    n: usize,
}

impl Quadratic {
    fn grad(&self, w: &[f64], out: &mut [f64]) {
        for ((o, row), m) in out.iter_mut().zip(self.k.chunks_exact(self.n)).zip(&self.m) {
            *o = row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() - m;
        }
    }

    fn value(&self, w: &[f64]) -> f64 {
        let mut q = 0.0;
        for i in 0..self.n {
            let row = &self.k[i * self.n..(i + 1) * self.n];
            q += w[i] * row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
        }
        0.5 * q - self.m.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()
    }
}

fn gradient_mapping_norm(w: &[f64], grad: &[f64], lipschitz: f64) -> f64 {
    let stepped: Vec<f64> = w.iter().zip(grad).map(|(x, g)| x - g / lipschitz).collect();
    let p = project_to_simplex(&stepped);
    let sq: f64 = w.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum();
    lipschitz * libm::sqrt(sq)
}

/// Re-optimizes dataset `t`'s weights over `support`, starting at `initial`.
/// The returned loss never exceeds the loss at `initial`.
pub fn reoptimize_weights(
    cache: &GramCache,
    t: usize,
    support: &[usize],
    initial: &[f64],
    config: &ReoptConfig,
) -> Result<ReoptOutcome> {
    if support.is_empty() {
        return Err(Error::InvalidWeights("cannot optimize weights over an empty support".into()));
    }
    let start_loss = mmd::loss(cache, t, support, initial)?;
    let n = support.len();
    let mut k = Vec::with_capacity(n * n);
    for &i in support {
        let row = cache.k_row(i);
        k.extend(support.iter().map(|&j| row[j]));
    }
    let mu = cache.mu(t);
    let q = Quadratic {
        k,
        m: support.iter().map(|&i| mu[i]).collect(),
        n,
    };
    let lipschitz = (0..n)
        .map(|i| q.k[i * n..(i + 1) * n].iter().map(|v| libm::fabs(*v)).sum::<f64>())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut best = initial.to_vec();
    let mut best_loss = start_loss;
    let mut x = project_to_simplex(initial);
    let mut fx = q.value(&x);
    if fx < best_loss {
        best.clone_from(&x);
        best_loss = fx;
    }
    let mut y = x.clone();
    let mut momentum = 1.0f64;
    let mut g = alloc::vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        q.grad(&x, &mut g);
        if gradient_mapping_norm(&x, &g, lipschitz) <= config.tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        q.grad(&y, &mut g);
        let stepped: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - b / lipschitz).collect();
        let x_next = project_to_simplex(&stepped);
        let f_next = q.value(&x_next);
        if f_next > fx {
            // restart momentum from the last accepted point
            y.clone_from(&x);
            momentum = 1.0;
            continue;
        }
        let momentum_next = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * momentum * momentum));
        let beta = (momentum - 1.0) / momentum_next;
        y = x_next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + beta * (a - b))
            .collect();
        momentum = momentum_next;
        x = x_next;
        fx = f_next;
        if fx < best_loss {
            best.clone_from(&x);
            best_loss = fx;
        }
    }
    if !converged {
        q.grad(&x, &mut g);
        converged = gradient_mapping_norm(&x, &g, lipschitz) <= config.tolerance;
    }
    let loss = mmd::loss(cache, t, support, &best)?;
    Ok(ReoptOutcome {
        weights: best,
        loss,
        iterations,
        converged,
    })
}
