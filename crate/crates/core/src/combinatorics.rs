//! Exact binomial coefficients and lexicographic k-subset ranking.

use crate::error::{Error, Result};

/// `C(n, k)` in 128-bit arithmetic, `None` on overflow.
pub fn checked_binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1); cancel the common factor
        // first so the product only overflows when the result would.
        let den = i as u128 + 1;
        let g = gcd(acc, den);
        let num = (n - i) as u128 / (den / g);
        acc = (acc / g).checked_mul(num)?;
    }
    Some(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn binomial(n: u64, k: u64) -> Result<u128> {
    checked_binomial(n, k).ok_or(Error::BinomialOverflow { n, k })
}

/// Binomial coefficient that is known to fit (small arguments, internal use).
pub(crate) fn small_binomial(n: u64, k: u64) -> u128 {
    checked_binomial(n, k).expect("binomial coefficient overflow")
}

/// Number of k-subsets of `[lo..=n]` (1-based), i.e. `C(n - lo + 1, k)`.
fn count_from(n: u32, lo: u32, k: u32) -> u128 {
    if lo > n + 1 {
        return if k == 0 { 1 } else { 0 };
    }
    small_binomial((n + 1 - lo) as u64, k as u64)
}

/// The `rank`-th k-subset of `[1..=n]` in lexicographic order (0-based rank).
///
/// Each element is located by binary search over the cumulative counts, so a
/// call costs `O(k^2 log n)` binomial evaluations regardless of `rank`.
pub fn unrank_combination(n: u32, k: u32, mut rank: u128) -> Vec<u32> {
    let mut out = Vec::with_capacity(k as usize);
    let mut lo = 1u32;
    for pos in 0..k {
        let rest = k - pos - 1;
        // Subsets whose element at `pos` is >= c (with prefix fixed) number
        // count_from(n, c, k - pos). Find the largest c with
        // total - count_from(n, c, k-pos) <= rank.
        let total = count_from(n, lo, k - pos);
        let (mut a, mut b) = (lo, n - rest);
        while a < b {
            let mid = a + (b - a).div_ceil(2);
            let skipped = total - count_from(n, mid, k - pos);
            if skipped <= rank {
                a = mid;
            } else {
                b = mid - 1;
            }
        }
        rank -= total - count_from(n, a, k - pos);
        out.push(a);
        lo = a + 1;
    }
    out
}

/// Lexicographic rank of a sorted k-subset of `[1..=n]`.
pub fn rank_combination(n: u32, subset: &[u32]) -> u128 {
    let k = subset.len() as u32;
    let mut rank = 0u128;
    let mut lo = 1u32;
    for (pos, &c) in subset.iter().enumerate() {
        let width = k - pos as u32;
        rank += count_from(n, lo, width) - count_from(n, c, width);
        lo = c + 1;
    }
    rank
}

/// All r-element subsets of `items` (assumed sorted), in lexicographic order.
pub fn subsets(items: &[u32], r: usize) -> Vec<Vec<u32>> {
    let m = items.len();
    let mut out = Vec::new();
    if r > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = r;
        while i > 0 && idx[i - 1] == i - 1 + m - r {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
