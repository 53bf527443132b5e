//! Seeded randomness. Every random draw in the crate goes through a
//! [`Rng64`] created from an explicit seed.

use num::{BigInt, BigRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::C64;

pub type Rng64 = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent child seed from a parent seed and a label.
pub fn child_seed(seed: u64, label: u64) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    r.gen()
}

/// Generic data vector: integers uniform in `[10^3, 10^6]`.
pub fn generic_data(rng: &mut Rng64, len: usize) -> Vec<BigRational> {
    (0..len)
        .map(|_| BigRational::from_integer(BigInt::from(rng.gen_range(1_000i64..=1_000_000))))
        .collect()
}

pub fn int_in(rng: &mut Rng64, lo: i64, hi: i64) -> i64 {
    rng.gen_range(lo..=hi)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Random complex number with independent standard-normal-ish parts.
pub fn complex(rng: &mut Rng64) -> C64 {
    let a: f64 = rng.gen_range(-1.0..1.0);
    let b: f64 = rng.gen_range(-1.0..1.0);
    C64::new(a, b)
}

/// Random point on the unit circle.
pub fn unit_complex(rng: &mut Rng64) -> C64 {
    let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    C64::new(th.cos(), th.sin())
}
