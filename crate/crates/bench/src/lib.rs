//! Shared fixtures for the benchmarks.

use fdiv_core::bundle_p1::BundleP1;
use fdiv_core::poly::PolyMatrix;
use fdiv_core::spectral::SpectralPage;
use fdiv_core::{gen, spectral, Field};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bundle(r: usize, f: &Field) -> BundleP1 {
    gen::random_bundle(&mut rng(1), r, -3, 3, f)
}

pub fn poly_tower(r: usize, n: usize, f: &Field) -> Vec<PolyMatrix> {
    let mut g = rng(2);
    (0..n).map(|_| gen::random_unimodular(&mut g, r, 2, 1, f)).collect()
}

pub fn page() -> SpectralPage {
    spectral::random_page(&mut rng(3), 5, 4)
}
