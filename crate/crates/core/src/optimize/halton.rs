//! Low-discrepancy start points with an optional Cranley-Patterson shift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`.
pub fn halton(index: u64, base: u32) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    let b = base as u64;
    while i > 0 {
        f /= base as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Points in `[0, 1)^dim`, shifted modulo 1 by a seeded random vector.
pub struct HaltonSequence {
    dim: usize,
    shift: Vec<f64>,
    next: u64,
}

impl HaltonSequence {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.random::<f64>()).collect();
        HaltonSequence { dim, shift, next: 1 }
    }

    pub fn unshifted(dim: usize) -> Self {
        assert!(dim <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
        HaltonSequence {
            dim,
            shift: vec![0.0; dim],
            next: 1,
        }
    }

    pub fn take_points(&mut self, n: usize) -> Vec<Vec<f64>> {
        self.by_ref().take(n).collect()
    }
}

impl Iterator for HaltonSequence {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let i = self.next;
        self.next += 1;
        Some(
            (0..self.dim)
                .map(|d| (halton(i, PRIMES[d]) + self.shift[d]).fract())
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn seeded_sequences_repeat() {
        let a = HaltonSequence::new(4, 9).take_points(8);
        let b = HaltonSequence::new(4, 9).take_points(8);
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|&x| (0.0..1.0).contains(&x)));
    }
}
