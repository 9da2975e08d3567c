//! Counter-based random numbers.
//!
//! Every draw is a pure function of an integer key, so a Monte Carlo run
//! produces bit-identical numbers no matter how paths are scheduled across
//! threads. Keys are built by folding (seed, path, mode, step) through a
//! splitmix64-style finalizer; the statistical quality of that finalizer is
//! plenty for desk-scale simulation.

use crate::fmath;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const SALT_A: u64 = 0x85eb_ca77_c2b2_ae63;
const SALT_B: u64 = 0xc2b2_ae3d_27d4_eb4f;

/// splitmix64 finalizer: a bijective avalanche mix on 64 bits.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds one more coordinate into a key.
#[inline]
pub fn fold(key: u64, word: u64) -> u64 {
    mix64(key ^ word.wrapping_mul(GOLDEN).wrapping_add(SALT_A))
}

/// Key for the increment of mode `mode` at global step `step` on path
/// `path` of the stream identified by `seed`.
#[inline]
pub fn increment_key(seed: u64, path: u64, mode: u64, step: u64) -> u64 {
    fold(fold(fold(mix64(seed), path), mode), step)
}

/// Uniform in the open interval (0, 1), derived from the top 53 bits.
#[inline]
pub fn uniform(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard normal deviate for a key, via Box-Muller on two derived
/// uniforms. One key, one deviate; the sine branch is discarded.
pub fn standard_normal(key: u64) -> f64 {
    let u1 = uniform(mix64(key ^ SALT_A));
    let u2 = uniform(mix64(key ^ SALT_B));
    fmath::sqrt(-2.0 * fmath::ln(u1)) * fmath::cos(core::f64::consts::TAU * u2)
}

/// Uniform in (0, 1) for a key; used by the sampling-based assumption checks.
#[inline]
pub fn uniform_for(key: u64) -> f64 {
    uniform(mix64(key ^ SALT_B))
}

/// A cheap stateful stream of uniforms for sampling loops that do not need
/// the full (path, mode, step) addressing.
#[derive(Debug, Clone)]
pub struct SampleStream {
    state: u64,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        Self { state: mix64(seed) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in (0, 1).
    pub fn uniform(&mut self) -> f64 {
        uniform(self.next_u64())
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Log-uniform in [lo, hi), lo > 0.
    pub fn log_range(&mut self, lo: f64, hi: f64) -> f64 {
        fmath::exp(self.range(fmath::ln(lo), fmath::ln(hi)))
    }

    pub fn normal(&mut self) -> f64 {
        standard_normal(self.next_u64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_reproducible() {
        let a = increment_key(7, 3, 2, 100);
        let b = increment_key(7, 3, 2, 100);
        assert_eq!(a, b);
        assert_ne!(a, increment_key(7, 3, 2, 101));
        assert_ne!(a, increment_key(7, 4, 2, 100));
    }

    #[test]
    fn normal_moments() {
        // 10^6 draws: mean within 5 stderr of 0, variance within 5 stderr of 1.
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for i in 0..n {
            let z = standard_normal(increment_key(42, 0, 0, i as u64));
            sum += z;
            sum_sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        let se_mean = 1.0 / (n as f64).sqrt();
        let se_var = (2.0f64 / n as f64).sqrt();
        assert!(mean.abs() < 5.0 * se_mean, "mean {mean}");
        assert!((var - 1.0).abs() < 5.0 * se_var, "var {var}");
    }

    #[test]
    fn uniform_stays_in_open_interval() {
        for i in 0..10_000u64 {
            let u = uniform(mix64(i));
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
