//! Synthetic Gaussian data for the convergence study.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// D×N matrix of i.i.d. N(mean, variance) entries, seeded.
pub fn generate_gaussian_data(dim: usize, len: usize, mean: f64, variance: f64, seed: u64) -> DMatrix<f64> {
    let sd = variance.sqrt();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    DMatrix::from_fn(dim, len, |_, _| {
        mean + sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
    })
}
