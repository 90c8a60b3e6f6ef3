//! Seeded pseudorandom stream.
//!
//! Every random decision in the crate draws from [`GameRng`], a Xoshiro256++
//! generator seeded through SplitMix64. The algorithm is fixed, so a seed
//! reproduces the same stream on every platform.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Clone, Debug)]
pub struct GameRng {
    inner: Xoshiro256PlusPlus,
}

impl GameRng {
    pub fn new(seed: u64) -> Self {
        GameRng {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Derives an independent stream, e.g. for per-attempt resampling.
    pub fn fork(&mut self) -> GameRng {
        GameRng::new(self.inner.random())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }

    /// Uniform in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: i32, hi: i32) -> i32 {
        self.inner.random_range(lo..=hi)
    }

    /// True with probability `p / 100`.
    pub fn percent(&mut self, p: i64) -> bool {
        if p <= 0 {
            false
        } else if p >= 100 {
            true
        } else {
            (self.inner.random_range(0..100) as i64) < p
        }
    }

    /// True with probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.inner.random::<f64>() < p
    }

    /// Sum of `n` independent uniform draws from `1..=m`.
    pub fn roll(&mut self, n: u32, m: u32) -> i64 {
        (0..n).map(|_| self.inner.random_range(1..=m) as i64).sum()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }

    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> Option<&'a T> {
        if items.is_empty() {
            None
        } else {
            Some(&items[self.below(items.len())])
        }
    }
}

/// Convenience wrapper matching the dice notation `NdM`.
pub fn roll_dice(n: u32, m: u32, rng: &mut GameRng) -> i64 {
    rng.roll(n, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = GameRng::new(42);
        let mut b = GameRng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn stream_is_frozen() {
        // Guards against silent changes in the generator or its seeding.
        let mut r = GameRng::new(0);
        let first: Vec<u64> = (0..3).map(|_| r.next_u64()).collect();
        let mut again = GameRng::new(0);
        let second: Vec<u64> = (0..3).map(|_| again.next_u64()).collect();
        assert_eq!(first, second);
        assert_eq!(first[0], FROZEN_SEED0_FIRST);
    }

    const FROZEN_SEED0_FIRST: u64 = 0x53175d61490b23df;

    #[test]
    fn one_d_one_is_one() {
        let mut r = GameRng::new(3);
        for _ in 0..100 {
            assert_eq!(roll_dice(1, 1, &mut r), 1);
        }
    }

    #[test]
    fn roll_support() {
        let mut r = GameRng::new(9);
        for _ in 0..10_000 {
            let v = r.roll(3, 4);
            assert!((3..=12).contains(&v));
        }
    }

    #[test]
    fn percent_edges() {
        let mut r = GameRng::new(1);
        assert!((0..1000).all(|_| !r.percent(0)));
        assert!((0..1000).all(|_| r.percent(100)));
    }
}
