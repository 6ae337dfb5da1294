//! Low-discrepancy sample points in axis-aligned boxes.
//!
//! Points come from a Halton sequence shifted modulo one by a random vector
//! (a Cranley–Patterson rotation) drawn from a seeded ChaCha stream, so a
//! seed fully determines the sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Closed box `[lo_i, hi_i]` in each coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box bounds must have equal length");
        SampleBox { lo, hi }
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        SampleBox::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_valid(&self) -> bool {
        self.lo.len() == self.hi.len()
            && self.dim() <= PRIMES.len()
            && self.lo.iter().zip(&self.hi).all(|(a, b)| a.is_finite() && b.is_finite() && a <= b)
    }
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = f64::from(base);
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % u64::from(base)) as f64 * inv;
        i /= u64::from(base);
        inv /= b;
    }
    out
}

/// `count` rotated Halton points inside `bx`.
pub fn halton_points(bx: &SampleBox, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(bx.dim() <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..bx.dim()).map(|_| rng.random::<f64>()).collect();
    (1..=count as u64)
        .map(|i| {
            (0..bx.dim())
                .map(|d| {
                    let t = (radical_inverse(i, PRIMES[d]) + shift[d]).fract();
                    bx.lo[d] + t * (bx.hi[d] - bx.lo[d])
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        let v: Vec<f64> = (1..5).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn points_stay_in_box_and_are_reproducible() {
        let bx = SampleBox::new(vec![0.5, -2.0, 1.0], vec![2.0, -1.0, 1.0]);
        let a = halton_points(&bx, 50, 7);
        let b = halton_points(&bx, 50, 7);
        assert_eq!(a, b);
        for p in &a {
            for d in 0..3 {
                assert!(p[d] >= bx.lo[d] && p[d] <= bx.hi[d]);
            }
        }
        assert_ne!(a, halton_points(&bx, 50, 8));
    }
}
