#![allow(dead_code)]
//! Random instances and direct-evaluation oracles. Nothing here goes through
//! the gram cache.

use dmmd_core::{DatasetCollection, EmbeddingTable, GramCache, KernelComponent, KernelModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub table: EmbeddingTable,
    pub collection: DatasetCollection,
    pub candidates: Vec<usize>,
    pub kernel: KernelModel,
    pub cache: GramCache,
}

impl Instance {
    pub fn points(&self, t: usize) -> Vec<Vec<f64>> {
        self.collection
            .rows(t)
            .iter()
            .map(|&r| self.table.row(r).to_vec())
            .collect()
    }

    pub fn candidate_points(&self, idx: &[usize]) -> Vec<Vec<f64>> {
        idx.iter()
            .map(|&i| self.table.row(self.candidates[i]).to_vec())
            .collect()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `sizes.len()` datasets and `n_u` separate candidates, uniform in `[-2, 2]^d`,
/// with one or two random SE components.
pub fn random_instance(seed: u64, d: usize, sizes: &[usize], n_u: usize) -> Instance {
    let mut r = rng(seed);
    let mut table = EmbeddingTable::new(d).unwrap();
    let mut collection = DatasetCollection::new();
    let mut next = 0usize;
    let mut push = |table: &mut EmbeddingTable, r: &mut ChaCha8Rng| {
        let v: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
        next += 1;
        table.push(format!("p{next}"), &v).unwrap()
    };
    for (t, &n) in sizes.iter().enumerate() {
        let rows = (0..n).map(|_| push(&mut table, &mut r)).collect();
        collection.add_dataset(&table, format!("t{t}"), rows).unwrap();
    }
    let candidates: Vec<usize> = (0..n_u).map(|_| push(&mut table, &mut r)).collect();
    let n_comp = r.random_range(1..=2);
    let kernel = KernelModel::new(
        (0..n_comp)
            .map(|c| KernelComponent {
                bandwidth: r.random_range(0.5..3.0),
                tag: format!("c{c}"),
            })
            .collect(),
    )
    .unwrap();
    let cache = GramCache::build(&kernel, &table, &collection, &candidates, None).unwrap();
    Instance {
        table,
        collection,
        candidates,
        kernel,
        cache,
    }
}

/// Random point on the probability simplex (normalized exponentials).
pub fn random_simplex(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -r.random_range(1e-12f64..1.0).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Random distinct subset of `0..n` of size `m`.
pub fn random_subset(r: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<usize> {
    rand::seq::index::sample(r, n, m).into_vec()
}

pub fn k(kernel: &KernelModel, x: &[f64], y: &[f64]) -> f64 {
    kernel.eval(x, y)
}

/// The empirical MMD² estimator as three explicit sums.
pub fn mmd_triple_sum(kernel: &KernelModel, xs: &[Vec<f64>], us: &[Vec<f64>], w: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mut xx = 0.0;
    for a in xs {
        for b in xs {
            xx += k(kernel, a, b);
        }
    }
    let mut uu = 0.0;
    for (i, a) in us.iter().enumerate() {
        for (j, b) in us.iter().enumerate() {
            uu += w[i] * w[j] * k(kernel, a, b);
        }
    }
    let mut xu = 0.0;
    for a in xs {
        for (j, b) in us.iter().enumerate() {
            xu += w[j] * k(kernel, a, b);
        }
    }
    xx / (n * n) + uu - 2.0 * xu / n
}

/// Loss of a (possibly unnormalized) measure, by direct sums.
pub fn loss_direct(kernel: &KernelModel, xs: &[Vec<f64>], us: &[Vec<f64>], w: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mut uu = 0.0;
    for (i, a) in us.iter().enumerate() {
        for (j, b) in us.iter().enumerate() {
            uu += w[i] * w[j] * k(kernel, a, b);
        }
    }
    let mut xu = 0.0;
    for a in xs {
        for (j, b) in us.iter().enumerate() {
            xu += w[j] * k(kernel, a, b);
        }
    }
    0.5 * uu - xu / n
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Loss of `(1−β)·Q + β·δ_u` by direct sums.
pub fn mixed_loss_direct(
    kernel: &KernelModel,
    xs: &[Vec<f64>],
    us: &[Vec<f64>],
    w: &[f64],
    new: &[f64],
    beta: f64,
) -> f64 {
    let mut pts = us.to_vec();
    pts.push(new.to_vec());
    let mut ww: Vec<f64> = w.iter().map(|x| x * (1.0 - beta)).collect();
    ww.push(beta);
    loss_direct(kernel, xs, &pts, &ww)
}
