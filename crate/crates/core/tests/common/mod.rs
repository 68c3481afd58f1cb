#![allow(dead_code)]

use fdiv_core::{Field, FieldSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gf(p: u64) -> Field {
    Field::prime(p).unwrap()
}

pub fn ext(p: u64, modulus: &[u64]) -> Field {
    Field::new(FieldSpec::extension(p, modulus.to_vec())).unwrap()
}

/// Small fields including genuine extensions, so Frobenius twists are visible.
pub fn small_fields() -> Vec<Field> {
    vec![gf(2), gf(3), ext(2, &[1, 1, 1]), gf(5), gf(7), ext(2, &[1, 1, 0, 1]), ext(3, &[1, 0, 1])]
}
