//! Seeded fixtures shared by the benchmarks.

use affjet::jetspace::Region;
use affjet::symmetry::AffineMap3;
use affjet::{sample, JetPoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` exact third-order jets alternating between the two Hessian regions.
pub fn jets(n: usize, seed: u64) -> Vec<JetPoint> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| sample::random_jet(&mut r, 3, Some(if i % 2 == 0 { Region::Plus } else { Region::Minus })))
        .collect()
}

pub fn maps(n: usize, seed: u64) -> Vec<AffineMap3> {
    let mut r = rng(seed);
    (0..n).map(|_| sample::random_affine_map(&mut r)).collect()
}
