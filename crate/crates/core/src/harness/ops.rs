//! Individual Monte Carlo experiments. Each takes a resolved grid point and
//! a seed; trial `i` always uses `split_seed(seed, i)`, and per-trial results
//! are combined in trial order, so the thread count never changes a result.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, unrank_combination};
use crate::error::{Error, Result};
use crate::exploration::{detect_deviations, explore};
use crate::gw::{sample_gw, GwParams};
use crate::hypergraph::{build_r_line_graph, rset_degrees, sample_hypergraph, ModelParams, RSet};
use crate::rng::{rng_from_seed, split_seed};
use crate::spectra::{adjacency_matrix_capped, eigenvalues, esd_moments, frobenius_m2, graph_moments, gw_root_moments};
use crate::stats::{
    binomial_poisson_tv, binomial_upper_tail, fit_through_origin, mean_and_se, proportion_se, tv_from_counts,
};
use crate::topology::{ball_sketch, empirical_measure, empirical_measure_at, NeighborhoodDistribution};

/// Classes with fewer pooled observations are merged before computing TV.
pub const MIN_POOLED_CLASS: u64 = 5;
/// A side with more classes than this gets a warning in its record.
pub const DIVERSITY_CAP: usize = 20_000;
/// A grid point is degraded when more than this fraction of trials fail.
pub const DEGRADED_FRACTION: f64 = 0.01;
/// Relative tolerance of the eigenvalue-vs-trace moment cross-check.
pub const SPECTRAL_CHECK_TOL: f64 = 1e-9;

/// Environment variable naming a directory for memoized GW references.
pub const CACHE_ENV: &str = "HYPERLOCAL_CACHE_DIR";

fn degraded(failed: usize, trials: usize) -> bool {
    failed as f64 > DEGRADED_FRACTION * trials as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodRecord {
    pub depth: usize,
    pub tv: f64,
    pub classes_hypergraph: usize,
    pub classes_gw: usize,
    pub merged_classes: usize,
    pub roots_observed: u64,
    pub gw_samples: u64,
    pub trials: usize,
    pub failed_trials: usize,
    pub degraded: bool,
    pub warnings: Vec<String>,
}

/// Depth-`depth` classes of `U_r(H)` for one sampled hypergraph. All
/// `C(n, r)` roots are used up to `root_cap`; above it `root_cap` roots are
/// drawn uniformly without replacement.
pub fn hypergraph_measure(
    params: &ModelParams,
    depth: usize,
    root_cap: usize,
    seed: u64,
) -> Result<NeighborhoodDistribution> {
    let h = sample_hypergraph(params, seed)?;
    let g = build_r_line_graph(&h, params.r)?;
    let roots = params.rset_count()?;
    if roots <= root_cap as u128 {
        return empirical_measure(&g, depth);
    }
    let mut rng = rng_from_seed(split_seed(seed, 0));
    let picks = rand::seq::index::sample(&mut rng, roots as usize, root_cap);
    let chosen = picks.into_iter().map(|rank| {
        let set = RSet::from_sorted(unrank_combination(params.n, params.r, rank as u128));
        g.index_of(&set)
    });
    empirical_measure_at(&g, depth, chosen)
}

fn cache_path(d: u32, lambda: f64, depth: usize, samples: usize, seed: u64) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_ENV)?;
    let name = format!("gw-d{d}-l{:016x}-t{depth}-m{samples}-s{seed:016x}.json", lambda.to_bits());
    Some(PathBuf::from(dir).join(name))
}

/// Depth-`depth` class distribution at the root of `samples` d-block
/// Galton-Watson trees. Memoized on disk when [`CACHE_ENV`] is set.
pub fn gw_reference(d: u32, lambda: f64, depth: usize, samples: usize, seed: u64) -> Result<NeighborhoodDistribution> {
    let cache = cache_path(d, lambda, depth, samples, seed);
    if let Some(path) = &cache {
        if let Ok(text) = std::fs::read_to_string(path) {
            if let Ok(dist) = serde_json::from_str::<NeighborhoodDistribution>(&text) {
                return Ok(dist);
            }
        }
    }
    let params = GwParams::new(d, lambda, depth as u32)?;
    let coded = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let tree = sample_gw(&params, split_seed(seed, i))?;
            let rooted = tree.graph();
            let sketch = ball_sketch(rooted.graph(), rooted.root_index(), depth);
            Ok((sketch.canonicalize()?, sketch))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut dist = NeighborhoodDistribution::new(depth);
    for (code, sketch) in coded {
        dist.add_code(code, sketch, 1);
    }
    if let Some(path) = &cache {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
            super::write_atomic(path, serde_json::to_string(&dist)?.as_bytes())?;
        }
    }
    Ok(dist)
}

/// TV distance between the pooled neighbourhood classes of `H(n, k, p)` and
/// of the matching Galton-Watson limit.
pub fn neighborhood_tv(
    params: &ModelParams,
    depth: usize,
    trials: usize,
    gw_samples: usize,
    root_cap: usize,
    seed: u64,
) -> Result<NeighborhoodRecord> {
    if depth == 0 {
        return Err(Error::InvalidConfig("neighbourhood depth must be at least 1".into()));
    }
    let hn_seed = split_seed(seed, 0);
    let per_trial: Vec<Result<NeighborhoodDistribution>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| hypergraph_measure(params, depth, root_cap, split_seed(hn_seed, i)))
        .collect();
    let mut pooled = NeighborhoodDistribution::new(depth);
    let mut failed = 0usize;
    let mut warnings = Vec::new();
    for (i, result) in per_trial.into_iter().enumerate() {
        match result {
            Ok(dist) => pooled.merge(dist),
            Err(e) => {
                failed += 1;
                warnings.push(format!("trial {i}: {e}"));
            }
        }
    }
    let reference = gw_reference(params.block_size(), params.lambda, depth, gw_samples, split_seed(seed, 1))?;
    for (side, dist) in [("hypergraph", &pooled), ("gw", &reference)] {
        if dist.counts.len() > DIVERSITY_CAP {
            warnings.push(format!("{side} side has {} classes (cap {DIVERSITY_CAP})", dist.counts.len()));
        }
    }
    let est = tv_from_counts(&pooled.counts, &reference.counts, MIN_POOLED_CLASS);
    Ok(NeighborhoodRecord {
        depth,
        tv: est.tv,
        classes_hypergraph: pooled.counts.len(),
        classes_gw: reference.counts.len(),
        merged_classes: est.merged_classes,
        roots_observed: pooled.total,
        gw_samples: reference.total,
        trials,
        failed_trials: failed,
        degraded: degraded(failed, trials),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeRecord {
    /// `C(n - r, k - r)`.
    pub degree_trials: u128,
    pub exact_tv: f64,
    pub bound: f64,
    pub sampled_tv: f64,
    pub observations: u64,
    pub violation: bool,
}

/// Exact TV between the r-set degree law `Binomial(C(n-r, k-r), p)` and
/// `Poisson(lambda)`, its bound `lambda / C(n-r, k-r)`, and a sampled
/// estimate pooling the degrees of every r-set over enough hypergraphs to
/// reach `samples` observations.
pub fn degree_poisson_tv(params: &ModelParams, samples: usize, seed: u64) -> Result<DegreeRecord> {
    let m = params.degree_trials();
    let exact_tv = binomial_poisson_tv(m, params.p, params.lambda);
    let bound = params.lambda / m as f64;
    let per_graph = params.rset_count()?;
    let graphs = (samples as u128).div_ceil(per_graph).max(1) as u64;
    let histograms = (0..graphs)
        .into_par_iter()
        .map(|i| {
            let h = sample_hypergraph(params, split_seed(seed, i))?;
            let degrees = rset_degrees(&h, params.r);
            let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
            for &deg in degrees.values() {
                *hist.entry(deg).or_insert(0) += 1;
            }
            *hist.entry(0).or_insert(0) += (per_graph - degrees.len() as u128) as u64;
            Ok(hist)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pooled: BTreeMap<usize, u64> = BTreeMap::new();
    for hist in histograms {
        for (deg, c) in hist {
            *pooled.entry(deg).or_insert(0) += c;
        }
    }
    let observations: u64 = pooled.values().sum();
    let top = pooled.keys().next_back().copied().unwrap_or(0).max((params.lambda + 60.0) as usize);
    let mut q = (-params.lambda).exp();
    let (mut diff, mut q_mass) = (0.0, 0.0);
    for j in 0..=top {
        let f = pooled.get(&j).copied().unwrap_or(0) as f64 / observations as f64;
        diff += (f - q).abs();
        q_mass += q;
        q *= params.lambda / (j + 1) as f64;
    }
    diff += (1.0 - q_mass).max(0.0);
    Ok(DegreeRecord {
        degree_trials: m,
        exact_tv,
        bound,
        sampled_tv: 0.5 * diff,
        observations,
        violation: exact_tv > bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRecord {
    pub threshold: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub bound: f64,
    /// `P(Binomial(C(n, k), p) > threshold)`.
    pub exact: f64,
    pub samples: usize,
    pub violation: bool,
}

/// Frequency of `|E(H)| > 3 n lambda / (2k)` against `exp(-lambda n / (6k))`.
/// Defined for the vertex-degree scaling `r = 1`.
pub fn hyperedge_tail(params: &ModelParams, samples: usize, seed: u64) -> Result<TailRecord> {
    if params.r != 1 {
        return Err(Error::InvalidConfig("the hyperedge tail is defined for r = 1".into()));
    }
    let (n, k) = (params.n as f64, params.k as f64);
    let threshold = 3.0 * n * params.lambda / (2.0 * k);
    let bound = (-params.lambda * n / (6.0 * k)).exp();
    let exact = binomial_upper_tail(binomial(params.n as u64, params.k as u64)?, params.p, threshold);
    let hits = (0..samples as u64)
        .into_par_iter()
        .map(|i| Ok(sample_hypergraph(params, split_seed(seed, i))?.edge_count() as f64 > threshold))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&hit| hit)
        .count();
    let empirical = hits as f64 / samples as f64;
    let std_error = proportion_se(empirical, samples);
    Ok(TailRecord {
        threshold,
        empirical,
        std_error,
        bound,
        exact,
        samples,
        violation: empirical > bound + 3.0 * std_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRecord {
    pub depth: usize,
    pub trials: usize,
    /// Fraction of explorations with any deviation event within `depth` steps.
    pub rate: f64,
    pub std_error: f64,
    pub y_neq_z_rate: f64,
    pub escape_rate: f64,
    pub overlap_rate: f64,
}

/// Explores `depth` steps from `{1, ..., r}` in independent samples of
/// `H(n, k, p)` and counts the deviation events.
pub fn deviation_rate(params: &ModelParams, depth: usize, trials: usize, seed: u64) -> Result<DeviationRecord> {
    let root = RSet::initial(params.r);
    let flags = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let h = sample_hypergraph(params, split_seed(seed, i))?;
            let report = detect_deviations(&explore(&h, &root, depth), params.r, depth);
            Ok([report.any(), report.y_neq_z.is_some(), report.edge_escapes.is_some(), report.edge_overlap.is_some()])
        })
        .collect::<Result<Vec<[bool; 4]>>>()?;
    let frac = |j: usize| flags.iter().filter(|f| f[j]).count() as f64 / trials as f64;
    let rate = frac(0);
    Ok(DeviationRecord {
        depth,
        trials,
        rate,
        std_error: proportion_se(rate, trials),
        y_neq_z_rate: frac(1),
        escape_rate: frac(2),
        overlap_rate: frac(3),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub k: u32,
    pub r: u32,
    pub lambda: f64,
    pub n: Vec<u32>,
    pub rates: Vec<f64>,
    /// `a` in `rate ≈ a / (n - r)`.
    pub coefficient: f64,
    pub r_squared: f64,
    pub strictly_decreasing: bool,
}

/// Least-squares fit of deviation rates against `1 / (n - r)`.
pub fn deviation_decay(k: u32, r: u32, lambda: f64, points: &[(u32, f64)]) -> DecayFit {
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|p| p.0);
    let xs: Vec<f64> = sorted.iter().map(|&(n, _)| 1.0 / (n - r) as f64).collect();
    let ys: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let (coefficient, r_squared) = fit_through_origin(&xs, &ys);
    DecayFit {
        k,
        r,
        lambda,
        n: sorted.iter().map(|p| p.0).collect(),
        strictly_decreasing: ys.windows(2).all(|w| w[1] < w[0]),
        rates: ys,
        coefficient,
        r_squared,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: usize,
    pub esd_mean: f64,
    pub esd_std_error: f64,
    pub gw_mean: f64,
    pub gw_std_error: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub within_3se: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRecord {
    pub dimension: u64,
    pub trials: usize,
    pub dense_trials: usize,
    pub failed_trials: usize,
    pub degraded: bool,
    pub gw_trials: usize,
    /// Largest relative gap between eigenvalue moments and exact traces.
    pub max_check_error: f64,
    pub check_passed: bool,
    pub mean_mass_at_zero: Option<f64>,
    pub rows: Vec<MomentRow>,
    pub failures: Vec<String>,
}

struct SpectralTrial {
    traces: Vec<f64>,
    check_error: Option<f64>,
    mass_at_zero: Option<f64>,
}

fn spectral_trial(params: &ModelParams, dim: u64, order: usize, dense_cap: usize, seed: u64) -> Result<SpectralTrial> {
    let h = sample_hypergraph(params, seed)?;
    let g = build_r_line_graph(&h, params.r)?;
    let traces = graph_moments(&g, dim, order).moments;
    let active = (0..g.stored_count()).filter(|&v| !g.neighbors(v).is_empty()).count();
    if active > dense_cap {
        return Ok(SpectralTrial { traces, check_error: None, mass_at_zero: None });
    }
    let sample = eigenvalues(&adjacency_matrix_capped(&g, dim, dense_cap)?)?;
    let esd = esd_moments(&sample, order.max(2));
    let frob = frobenius_m2(&g, dim);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let mut err = rel(esd.get(2), frob);
    for (k, &t) in traces.iter().enumerate() {
        err = err.max(rel(esd.get(k + 1), t));
    }
    Ok(SpectralTrial { traces, check_error: Some(err), mass_at_zero: Some(sample.mass_at_zero(1e-8)) })
}

/// Moments `m_1..m_order` of the ESD of `A_H` (mean over `trials` samples)
/// next to Monte Carlo root moments of the Galton-Watson limit.
///
/// ESD moments are exact traces `tr(A^k) / C(n, r)` from closed walks.
/// When the non-isolated block fits under `dense_cap` the eigenvalues are
/// also computed and their moments checked against the traces.
pub fn spectral_compare(
    params: &ModelParams,
    order: usize,
    trials: usize,
    gw_trials: usize,
    dense_cap: usize,
    seed: u64,
) -> Result<SpectralRecord> {
    let dim =
        u64::try_from(params.rset_count()?).map_err(|_| Error::DenseCap { dim: u64::MAX, cap: dense_cap as u64 })?;
    let hn_seed = split_seed(seed, 0);
    let results: Vec<Result<SpectralTrial>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| spectral_trial(params, dim, order, dense_cap, split_seed(hn_seed, i)))
        .collect();
    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(t) => ok.push(t),
            Err(e) => failures.push(format!("trial {i}: {e}")),
        }
    }
    if ok.is_empty() {
        return Err(Error::InvalidConfig(format!("all {trials} spectral trials failed")));
    }
    let gw = gw_root_moments(params.block_size(), params.lambda, order, gw_trials, split_seed(seed, 1))?;
    let gw_se = gw.std_errors.clone().unwrap_or_else(|| vec![0.0; order]);
    let rows = (0..order)
        .map(|j| {
            let column: Vec<f64> = ok.iter().map(|t| t.traces[j]).collect();
            let (esd_mean, esd_std_error) = mean_and_se(&column);
            let gw_mean = gw.moments[j];
            let abs_gap = (esd_mean - gw_mean).abs();
            let scale = esd_mean.abs().max(gw_mean.abs());
            MomentRow {
                k: j + 1,
                esd_mean,
                esd_std_error,
                gw_mean,
                gw_std_error: gw_se[j],
                abs_gap,
                rel_gap: if scale > 0.0 { abs_gap / scale } else { 0.0 },
                within_3se: abs_gap <= 3.0 * esd_std_error.hypot(gw_se[j]),
            }
        })
        .collect();
    let checks: Vec<f64> = ok.iter().filter_map(|t| t.check_error).collect();
    let max_check_error = checks.iter().copied().fold(0.0, f64::max);
    let masses: Vec<f64> = ok.iter().filter_map(|t| t.mass_at_zero).collect();
    Ok(SpectralRecord {
        dimension: dim,
        trials,
        dense_trials: checks.len(),
        failed_trials: failures.len(),
        degraded: degraded(failures.len(), trials),
        gw_trials,
        max_check_error,
        check_passed: max_check_error <= SPECTRAL_CHECK_TOL,
        mean_mass_at_zero: (!masses.is_empty()).then(|| masses.iter().sum::<f64>() / masses.len() as f64),
        rows,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_point_is_trivial() {
        let p = ModelParams::resolve(12, 3, 1, 0.0).unwrap();
        let nb = neighborhood_tv(&p, 2, 2, 50, 1000, 4).unwrap();
        assert_eq!(nb.tv, 0.0);
        assert_eq!(nb.classes_hypergraph, 1);
        assert_eq!(nb.classes_gw, 1);
        let deg = degree_poisson_tv(&p, 100, 4).unwrap();
        assert_eq!(deg.exact_tv, 0.0);
        assert_eq!(deg.sampled_tv, 0.0);
        let tail = hyperedge_tail(&p, 20, 4).unwrap();
        assert_eq!(tail.empirical, 0.0);
        assert!(!tail.violation);
        let dev = deviation_rate(&p, 3, 20, 4).unwrap();
        assert_eq!(dev.rate, 0.0);
        let sp = spectral_compare(&p, 4, 2, 10, 4000, 4).unwrap();
        assert!(sp.rows.iter().all(|r| r.abs_gap == 0.0));
    }

    #[test]
    fn root_subsampling_keeps_the_cap() {
        let p = ModelParams::resolve(30, 3, 2, 1.0).unwrap();
        let dist = hypergraph_measure(&p, 1, 100, 7).unwrap();
        assert_eq!(dist.total, 100);
        let full = hypergraph_measure(&p, 1, 1000, 7).unwrap();
        assert_eq!(full.total, 435);
    }

    #[test]
    fn decay_fit_on_exact_inverse_law() {
        let pts: Vec<(u32, f64)> = [50u32, 100, 200, 400].iter().map(|&n| (n, 2.0 / (n - 1) as f64)).collect();
        let fit = deviation_decay(3, 1, 2.0, &pts);
        assert!((fit.coefficient - 2.0).abs() < 1e-12);
        assert!(fit.r_squared > 0.999_999);
        assert!(fit.strictly_decreasing);
    }

    #[test]
    fn spectral_m1_gap_is_exactly_zero() {
        let p = ModelParams::resolve(40, 3, 1, 1.0).unwrap();
        let sp = spectral_compare(&p, 4, 3, 200, 4000, 11).unwrap();
        assert_eq!(sp.rows[0].esd_mean, 0.0);
        assert_eq!(sp.rows[0].gw_mean, 0.0);
        assert_eq!(sp.rows[0].abs_gap, 0.0);
        assert!(sp.check_passed, "check error {}", sp.max_check_error);
        assert_eq!(sp.dense_trials, 3);
    }
}
