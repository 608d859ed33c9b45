//! Exact pmf sums and small estimators used by the experiment harness.

use std::collections::BTreeMap;

/// Probability mass below which a term is treated as negligible once past
/// the mean.
const NEGLIGIBLE: f64 = 1e-30;

/// `P(Binomial(trials, p) = j)` for `j = 0, 1, ...` by forward recursion.
struct BinomialPmf {
    trials: f64,
    ratio: f64,
    next: u64,
    current: f64,
    degenerate_one: bool,
}

impl BinomialPmf {
    fn new(trials: u128, p: f64) -> Self {
        let trials = trials as f64;
        let degenerate_one = p >= 1.0;
        let current = if p <= 0.0 {
            1.0
        } else if degenerate_one {
            if trials == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            (trials * (-p).ln_1p()).exp()
        };
        Self { trials, ratio: if p > 0.0 && p < 1.0 { p / (1.0 - p) } else { 0.0 }, next: 0, current, degenerate_one }
    }
}

impl Iterator for BinomialPmf {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let j = self.next as f64;
        if j > self.trials {
            return None;
        }
        let out = if self.degenerate_one {
            if j == self.trials {
                1.0
            } else {
                0.0
            }
        } else {
            self.current
        };
        self.current *= (self.trials - j) / (j + 1.0) * self.ratio;
        self.next += 1;
        Some(out)
    }
}

/// Exact total-variation distance between `Binomial(trials, p)` and
/// `Poisson(lambda)` by summing `|b_j - q_j| / 2` until both pmfs are
/// negligible. Intended for `lambda` below a few hundred.
pub fn binomial_poisson_tv(trials: u128, p: f64, lambda: f64) -> f64 {
    let mut binom = BinomialPmf::new(trials, p);
    let mut q = (-lambda).exp();
    let mut total = 0.0;
    let mut j = 0u64;
    let mean = trials as f64 * p;
    loop {
        let b = binom.next().unwrap_or(0.0);
        total += (b - q).abs();
        j += 1;
        let past_bulk = (j as f64) > mean.max(lambda) + 1.0;
        q = if lambda > 0.0 { q * lambda / j as f64 } else { 0.0 };
        if past_bulk && b < NEGLIGIBLE && q < NEGLIGIBLE && binom.current < NEGLIGIBLE {
            break;
        }
        if (j as f64) > trials as f64 && q < NEGLIGIBLE {
            break;
        }
    }
    0.5 * total
}

/// `P(Binomial(trials, p) > threshold)` by summing the pmf above
/// `floor(threshold)`.
pub fn binomial_upper_tail(trials: u128, p: f64, threshold: f64) -> f64 {
    if threshold < 0.0 {
        return 1.0;
    }
    let cut = threshold.floor() as u64;
    let mean = trials as f64 * p;
    let mut tail = 0.0;
    for (j, b) in BinomialPmf::new(trials, p).enumerate() {
        let j = j as u64;
        if j > cut {
            tail += b;
            if (j as f64) > mean && b < NEGLIGIBLE * tail.max(1e-300) {
                break;
            }
        }
    }
    tail
}

/// Plug-in total-variation distance between two count distributions after
/// merging every class whose pooled count is below `min_pooled` into one
/// "other" class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvEstimate {
    pub tv: f64,
    pub classes: usize,
    pub merged_classes: usize,
}

pub fn tv_from_counts<K: Ord>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>, min_pooled: u64) -> TvEstimate {
    let total_a: u64 = a.values().sum();
    let total_b: u64 = b.values().sum();
    if total_a == 0 || total_b == 0 {
        return TvEstimate {
            tv: if total_a == total_b { 0.0 } else { 1.0 },
            classes: a.len().max(b.len()),
            merged_classes: 0,
        };
    }
    let (na, nb) = (total_a as f64, total_b as f64);
    let mut keys: Vec<&K> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let (mut other_a, mut other_b) = (0u64, 0u64);
    let mut merged = 0usize;
    let mut sum = 0.0;
    for k in &keys {
        let ca = a.get(k).copied().unwrap_or(0);
        let cb = b.get(k).copied().unwrap_or(0);
        if ca + cb < min_pooled {
            other_a += ca;
            other_b += cb;
            merged += 1;
        } else {
            sum += (ca as f64 / na - cb as f64 / nb).abs();
        }
    }
    sum += (other_a as f64 / na - other_b as f64 / nb).abs();
    TvEstimate { tv: (0.5 * sum).clamp(0.0, 1.0), classes: keys.len(), merged_classes: merged }
}

/// Least-squares fit `y ≈ a x` without intercept; returns `(a, R^2)` with
/// `R^2 = 1 - SS_res / SS_tot` about the mean of `y`.
pub fn fit_through_origin(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a * x).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    (a, r2)
}

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Standard error of a proportion estimated from `n` Bernoulli trials.
pub fn proportion_se(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}
