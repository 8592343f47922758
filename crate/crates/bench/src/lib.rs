//! Shared fixtures for the pipeline benchmarks in `benches/`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use graphmatch_core::ProfitMatrix;

/// Dense square profit matrix with standard-normal entries.
pub fn random_profit(n: usize, seed: u64) -> ProfitMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries =
        DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    ProfitMatrix::new(entries).expect("finite square matrix")
}

/// Dense symmetric matrix with standard-normal entries.
pub fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: DMatrix<f64> =
        DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    (&raw + raw.transpose()) * 0.5
}
