#![allow(dead_code)]

use itflow::numerics::spectral_radius;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(n: usize, m: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0))
}

/// Random dense matrix rescaled to spectral radius in [0.2, 0.95].
pub fn random_stable(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = uniform(n, n, rng);
    let rho = spectral_radius(&a).unwrap().max(1e-3);
    let target = rng.random_range(0.2..0.95);
    a * (target / rho)
}

pub fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let b = uniform(n, n, rng);
    &b * b.transpose() + DMatrix::identity(n, n) * 0.1
}

/// Random ordered (source, target) split of 0..n, both non-empty.
pub fn random_split(n: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        idx.swap(i, rng.random_range(0..=i));
    }
    let ns = rng.random_range(1..n);
    let nt = rng.random_range(1..=n - ns);
    (idx[..ns].to_vec(), idx[ns..ns + nt].to_vec())
}
