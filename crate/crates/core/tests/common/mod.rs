#![allow(dead_code)]

use graphon_core::Kernel64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric `m×m` grid with entries uniform in `[lo, hi]`.
pub fn random_grid(m: usize, lo: f64, hi: f64, seed: u64) -> Kernel64 {
    let mut r = rng(seed);
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let x = r.random_range(lo..=hi);
            v[i * m + j] = x;
            v[j * m + i] = x;
        }
    }
    Kernel64::grid(m, v).unwrap()
}

pub fn random_vector(m: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..m).map(|_| r.random_range(-1.0..=1.0)).collect()
}

pub fn block_kernel() -> Kernel64 {
    Kernel64::block(&[vec![0.8, -0.6], vec![-0.6, 0.8]]).unwrap()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
