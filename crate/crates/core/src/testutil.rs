//! Shared helpers for tests: seeded random group elements and rationals.

use crate::weightmod::Mat2;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Random word of the given length in S and T inside SL2(Z).
pub fn rand_sl2z(rng: &mut ChaCha8Rng, len: usize) -> Mat2 {
    let s = Mat2::from_i64(0, -1, 1, 0);
    let mut g = Mat2::identity();
    for _ in 0..len {
        match rng.gen_range(0..3) {
            0 => g = g.mul(&s),
            1 => g = g.mul(&Mat2::from_i64(1, rng.gen_range(1..4), 0, 1)),
            _ => g = g.mul(&Mat2::from_i64(1, -rng.gen_range(1..4), 0, 1)),
        }
    }
    g
}

/// Random word in SL2(Z[1/p]) mixing SL2(Z) letters with their
/// omega-conjugates.
pub fn rand_gamma(rng: &mut ChaCha8Rng, p: u64, len: usize) -> Mat2 {
    let w = crate::bttree::omega_matrix(p);
    let winv = w.inv();
    let mut g = Mat2::identity();
    for _ in 0..len {
        let letter = rand_sl2z(rng, 1);
        if rng.gen_bool(0.5) {
            g = g.mul(&letter);
        } else {
            g = g.mul(&w.mul(&letter).mul(&winv));
        }
    }
    g
}
