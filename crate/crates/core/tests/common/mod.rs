//! Independent oracles and instance generators shared by the integration tests.
#![allow(dead_code)]

use dualrisk::{AlignedSample, DiscreteMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uni(values: &[f64]) -> DiscreteMeasure {
    let rows: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
    DiscreteMeasure::from_samples(&rows, None).unwrap()
}

/// Every permutation of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![perm.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            out.push(perm.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// `sum_k w_k u_k . x_sigma(k)` for one pairing.
pub fn pairing_value(mu: &DiscreteMeasure, x: &DiscreteMeasure, sigma: &[usize]) -> f64 {
    let mut total = 0.0;
    for k in 0..mu.len() {
        total += mu.weight(k) * dot(mu.atom(k), x.atom(sigma[k]));
    }
    total
}

/// Brute-force maximal correlation of two equal-weight measures of equal size.
pub fn brute_force_max(mu: &DiscreteMeasure, x: &DiscreteMeasure) -> f64 {
    assert_eq!(mu.len(), x.len());
    permutations(mu.len())
        .iter()
        .map(|p| pairing_value(mu, x, p))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn brute_force_min(mu: &DiscreteMeasure, x: &DiscreteMeasure) -> f64 {
    assert_eq!(mu.len(), x.len());
    permutations(mu.len())
        .iter()
        .map(|p| pairing_value(mu, x, p))
        .fold(f64::INFINITY, f64::min)
}

/// `n` rows in `[lo, hi)^d`.
pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

pub fn random_sample(rng: &mut ChaCha8Rng, n: usize, d: usize, lo: f64, hi: f64) -> AlignedSample {
    AlignedSample::from_rows(&random_rows(rng, n, d, lo, hi)).unwrap()
}

pub fn random_measure(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    lo: f64,
    hi: f64,
) -> DiscreteMeasure {
    DiscreteMeasure::from_samples(&random_rows(rng, n, d, lo, hi), None).unwrap()
}

/// Positive random weights (not normalized).
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.05..1.0)).collect()
}

/// `x` reordered so that it pairs with `mu`'s atoms by rank (univariate, equal sizes).
pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Classical comonotonicity of two univariate aligned samples.
pub fn classically_comonotonic(x: &[f64], y: &[f64]) -> bool {
    (0..x.len()).all(|s| (0..x.len()).all(|t| (x[s] - x[t]) * (y[s] - y[t]) >= 0.0))
}

/// Doubly stochastic matrix as a random convex combination of permutations.
pub fn random_doubly_stochastic(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> Vec<f64> {
    let perms = permutations(n.min(6));
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut d = vec![0.0; n * n];
    for w in weights {
        let p: Vec<usize> = if n <= 6 {
            perms[rng.random_range(0..perms.len())].clone()
        } else {
            let mut p: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                p.swap(i, rng.random_range(0..=i));
            }
            p
        };
        for (i, &j) in p.iter().enumerate() {
            d[i * n + j] += w;
        }
    }
    d
}

/// Rows of `D * y`.
pub fn apply(d: &[f64], y: &AlignedSample) -> AlignedSample {
    let n = y.len();
    let dim = y.dim();
    let mut coords = vec![0.0; n * dim];
    for i in 0..n {
        for j in 0..n {
            for c in 0..dim {
                coords[i * dim + c] += d[i * n + j] * y.row(j)[c];
            }
        }
    }
    AlignedSample::from_flat(dim, coords).unwrap()
}
