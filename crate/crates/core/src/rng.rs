//! Seeding and the two discrete samplers the simulators need.
//!
//! Every stochastic routine takes a `u64` seed and builds a [`ChaCha8Rng`]
//! from it, so results are reproducible across platforms and crate versions
//! of `rand`. Per-trial seeds are derived with [`split_seed`].

use libm::lgamma as ln_gamma;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child stream of `master`.
///
/// Rule: `mix64(master + (index + 1) * 0x9E3779B97F4A7C15)` with wrapping
/// arithmetic, i.e. the `(index + 1)`-th output of a SplitMix64 generator
/// started at `master`.
pub fn split_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw on `(0, 1]`.
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Number of failures before the first success of a Bernoulli(p) sequence.
///
/// Saturates at `u128::MAX` for astronomically long gaps.
pub fn geometric_skip<R: Rng + ?Sized>(rng: &mut R, p: f64) -> u128 {
    debug_assert!(p > 0.0 && p < 1.0);
    let g = (open_unit(rng).ln() / (-p).ln_1p()).floor();
    if g >= u128::MAX as f64 {
        u128::MAX
    } else {
        g as u128
    }
}

/// Largest rate served by sequential-search inversion.
pub const POISSON_INVERSION_MAX: f64 = 30.0;

/// Poisson(lambda) variate: inversion by sequential search up to
/// [`POISSON_INVERSION_MAX`], transformed rejection with squeeze (PTRS)
/// above it.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda <= POISSON_INVERSION_MAX {
        poisson_inversion(rng, lambda)
    } else {
        poisson_ptrs(rng, lambda)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let u = rng.gen::<f64>();
    let mut k = 0u64;
    let mut pmf = (-lambda).exp();
    let mut cdf = pmf;
    while u > cdf {
        k += 1;
        pmf *= lambda / k as f64;
        let next = cdf + pmf;
        if next == cdf {
            // Remaining tail mass is below f64 resolution.
            break;
        }
        cdf = next;
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.gen::<f64>() - 0.5;
        let v = rng.gen::<f64>();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -lambda + k * loglam - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_seed_is_stable_and_distinct() {
        let a: Vec<u64> = (0..100).map(|i| split_seed(7, i)).collect();
        let b: Vec<u64> = (0..100).map(|i| split_seed(7, i)).collect();
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
        assert_ne!(split_seed(7, 0), split_seed(8, 0));
    }

    fn check_poisson_moments(lambda: f64) {
        let mut rng = rng_from_seed(11);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_poisson(&mut rng, lambda) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (lambda / n as f64).sqrt();
        assert!((mean - lambda).abs() < 4.0 * se, "mean {mean} vs {lambda}");
        assert!((var / lambda - 1.0).abs() < 0.03, "var {var} vs {lambda}");
    }

    #[test]
    fn poisson_inversion_moments() {
        check_poisson_moments(1.5);
        check_poisson_moments(12.0);
    }

    #[test]
    fn poisson_rejection_moments() {
        check_poisson_moments(45.0);
        check_poisson_moments(400.0);
    }

    #[test]
    fn poisson_zero_rate() {
        let mut rng = rng_from_seed(1);
        assert_eq!(sample_poisson(&mut rng, 0.0), 0);
    }

    #[test]
    fn geometric_skip_mean() {
        let mut rng = rng_from_seed(3);
        let p = 0.02;
        let n = 100_000;
        let mean = (0..n).map(|_| geometric_skip(&mut rng, p) as f64).sum::<f64>() / n as f64;
        let expected = (1.0 - p) / p;
        let sd = ((1.0 - p) / (p * p)).sqrt();
        assert!((mean - expected).abs() < 4.0 * sd / (n as f64).sqrt());
    }
}
