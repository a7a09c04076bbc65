//! Deterministic PRNG used everywhere randomness is needed.
//!
//! The generator is PCG32 (XSH-RR 64/32) with a single fixed stream, so that
//! any implementation following this exact recipe reproduces our byte streams:
//!
//! - state update: `state = state * 6364136223846793005 + inc` (wrapping u64)
//! - output: `xorshifted = ((state_old >> 18) ^ state_old) >> 27` truncated to
//!   u32, rotated right by `state_old >> 59`
//! - seeding: `inc = (54 << 1) | 1 = 109`; `state = 0`; advance once; add the
//!   seed to `state`; advance once more
//! - `u64` draws: high 32 bits first, then low 32 bits
//! - `f64` in `[0, 1)`: `(u64 >> 11) * 2^-53`
//! - Gaussian draws: Box–Muller on two consecutive uniforms `u1, u2`;
//!   `r = sqrt(-2 ln(1 - u1))`, returning `r cos(2π u2)` first and caching
//!   `r sin(2π u2)` for the next call
//! - shuffle: Fisher–Yates, position `k` swapped with `k + (next_u32() % (n - k))`
//!
//! For seed 42 the first four `u32` outputs are
//! `0xa15c02b7, 0x7b47f409, 0xba1d3330, 0x83d2f293` (frozen in a test fixture).

const MULTIPLIER: u64 = 6364136223846793005;
const STREAM: u64 = 54;

#[derive(Debug, Clone)]
pub struct Pcg32 {
    state: u64,
    inc: u64,
    cached_gaussian: Option<f64>,
}

impl Pcg32 {
    pub fn new(seed: u64) -> Self {
        let mut rng = Pcg32 {
            state: 0,
            inc: (STREAM << 1) | 1,
            cached_gaussian: None,
        };
        rng.next_u32();
        rng.state = rng.state.wrapping_add(seed);
        rng.next_u32();
        rng
    }

    pub fn next_u32(&mut self) -> u32 {
        let old = self.state;
        self.state = old.wrapping_mul(MULTIPLIER).wrapping_add(self.inc);
        let xorshifted = (((old >> 18) ^ old) >> 27) as u32;
        let rot = (old >> 59) as u32;
        xorshifted.rotate_right(rot)
    }

    pub fn next_u64(&mut self) -> u64 {
        let hi = self.next_u32() as u64;
        let lo = self.next_u32() as u64;
        (hi << 32) | lo
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw via Box–Muller; pairs of uniforms are consumed
    /// in documented order and the sine half is cached.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.cached_gaussian.take() {
            return z;
        }
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.cached_gaussian = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Bounded draw via modulo reduction. The slight modulo bias is accepted
    /// in exchange for a trivially reproducible recipe.
    pub fn bounded_u32(&mut self, bound: u32) -> u32 {
        debug_assert!(bound > 0);
        self.next_u32() % bound
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        let n = items.len();
        for k in 0..n.saturating_sub(1) {
            let j = k + self.bounded_u32((n - k) as u32) as usize;
            items.swap(k, j);
        }
    }

    /// First `count` positions of a partial Fisher–Yates over `0..n`:
    /// `count` distinct indices drawn without replacement.
    pub fn sample_indices(&mut self, n: usize, count: usize) -> Vec<usize> {
        debug_assert!(count <= n);
        let mut idx: Vec<usize> = (0..n).collect();
        for k in 0..count {
            let j = k + self.bounded_u32((n - k) as u32) as usize;
            idx.swap(k, j);
        }
        idx.truncate(count);
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_u32_stream_seed_42() {
        // Frozen from an independent implementation of the documented recipe.
        let mut rng = Pcg32::new(42);
        let got: Vec<u32> = (0..4).map(|_| rng.next_u32()).collect();
        assert_eq!(got, vec![0xa15c02b7, 0x7b47f409, 0xba1d3330, 0x83d2f293]);
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = Pcg32::new(7);
        let mut b = Pcg32::new(7);
        for _ in 0..10 {
            assert_eq!(a.next_f64().to_bits(), b.next_f64().to_bits());
        }
    }

    #[test]
    fn different_seeds_differ() {
        let mut a = Pcg32::new(1);
        let mut b = Pcg32::new(2);
        let da: Vec<u64> = (0..10).map(|_| a.next_f64().to_bits()).collect();
        let db: Vec<u64> = (0..10).map(|_| b.next_f64().to_bits()).collect();
        assert_ne!(da, db);
    }

    #[test]
    fn uniforms_in_unit_interval() {
        let mut rng = Pcg32::new(3);
        for _ in 0..1000 {
            let u = rng.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn gaussian_moments_roughly_standard() {
        let mut rng = Pcg32::new(11);
        let n = 20_000;
        let draws: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn sample_indices_is_permutation_when_full() {
        let mut rng = Pcg32::new(5);
        let mut idx = rng.sample_indices(8, 8);
        idx.sort_unstable();
        assert_eq!(idx, (0..8).collect::<Vec<_>>());
    }
}
