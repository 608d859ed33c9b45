//! Adjacency spectra of r-set line graphs and closed-walk moments at the
//! root of the Galton-Watson limit.

mod eigen;

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::gw::{sample_gw, GwParams};
use crate::rng::split_seed;

pub use eigen::symmetric_eigenvalues;

/// Largest matrix the dense eigensolver will materialize.
pub const DEFAULT_DENSE_CAP: usize = 4000;

/// Symmetric, zero-diagonal, nonnegative integer matrix of dimension
/// `dim`. Only rows of non-isolated vertices are stored; the remaining
/// `dim - materialized()` rows are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    dim: u64,
    size: usize,
    entries: Vec<u32>,
}

impl AdjacencyMatrix {
    /// Wraps a dense `size x size` block, checking the adjacency invariants.
    pub fn from_dense(dim: u64, size: usize, entries: Vec<u32>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::InvalidConfig(format!("expected {} entries, got {}", size * size, entries.len())));
        }
        if (size as u64) > dim {
            return Err(Error::InvalidConfig(format!("block of size {size} exceeds dimension {dim}")));
        }
        for i in 0..size {
            if entries[i * size + i] != 0 {
                return Err(Error::InvalidConfig(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                if entries[i * size + j] != entries[j * size + i] {
                    return Err(Error::InvalidConfig(format!("asymmetric entry at ({i}, {j})")));
                }
            }
        }
        Ok(Self { dim, size, entries })
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    pub fn materialized(&self) -> usize {
        self.size
    }

    /// Entry `(i, j)`; indices at or past [`Self::materialized`] read as zero.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        if i < self.size && j < self.size {
            self.entries[i * self.size + j]
        } else {
            0
        }
    }

    pub fn trace(&self) -> u64 {
        (0..self.size).map(|i| self.get(i, i) as u64).sum()
    }

    pub fn frobenius_sq(&self) -> u64 {
        self.entries.iter().map(|&w| (w as u64) * (w as u64)).sum()
    }

    fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|&w| w as f64).collect()
    }
}

pub fn adjacency_matrix<V: Ord + Clone>(g: &WeightedGraph<V>, full_dim: u64) -> Result<AdjacencyMatrix> {
    adjacency_matrix_capped(g, full_dim, DEFAULT_DENSE_CAP)
}

/// Dense adjacency of `g` padded to `full_dim`. Isolated vertices are not
/// materialized, so `cap` bounds only the non-isolated block.
pub fn adjacency_matrix_capped<V: Ord + Clone>(
    g: &WeightedGraph<V>,
    full_dim: u64,
    cap: usize,
) -> Result<AdjacencyMatrix> {
    let active: Vec<usize> = (0..g.stored_count()).filter(|&i| !g.neighbors(i).is_empty()).collect();
    if (active.len() as u64) > full_dim {
        return Err(Error::InvalidConfig(format!(
            "full dimension {full_dim} is below the {} non-isolated vertices",
            active.len()
        )));
    }
    if active.len() > cap {
        return Err(Error::DenseCap { dim: active.len() as u64, cap: cap as u64 });
    }
    let mut position = vec![usize::MAX; g.stored_count()];
    for (p, &i) in active.iter().enumerate() {
        position[i] = p;
    }
    let size = active.len();
    let mut entries = vec![0u32; size * size];
    for (p, &i) in active.iter().enumerate() {
        for &(j, w) in g.neighbors(i) {
            entries[p * size + position[j]] = w;
        }
    }
    Ok(AdjacencyMatrix { dim: full_dim, size, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub n: u32,
    pub k: u32,
    pub r: u32,
    pub lambda: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub eigenvalues: Vec<f64>,
    pub provenance: Option<Provenance>,
}

/// Equal-width histogram of a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl SpectralSample {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    /// Fraction of eigenvalues within `tol` of zero.
    pub fn mass_at_zero(&self, tol: f64) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.eigenvalues.iter().filter(|x| x.abs() <= tol).count() as f64 / self.len() as f64
    }

    pub fn histogram(&self, bins: usize) -> Histogram {
        let bins = bins.max(1);
        let (lo, hi) = match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(&lo), Some(&hi)) if hi > lo => (lo, hi),
            (Some(&lo), _) => (lo - 0.5, lo + 0.5),
            _ => (0.0, 1.0),
        };
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        for &x in &self.eigenvalues {
            let b = (((x - lo) / width).floor() as isize).clamp(0, bins as isize - 1);
            counts[b as usize] += 1;
        }
        Histogram { edges, counts }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "eigenvalue"])?;
        for (i, x) in self.eigenvalues.iter().enumerate() {
            w.write_record([i.to_string(), format!("{x:.12e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// All `dim` eigenvalues of `m`, ascending. The zero rows that were not
/// materialized contribute exact zeros.
pub fn eigenvalues(m: &AdjacencyMatrix) -> Result<SpectralSample> {
    let mut values = symmetric_eigenvalues(m.to_f64(), m.size)?;
    values.extend(std::iter::repeat_n(0.0, (m.dim - m.size as u64) as usize));
    values.sort_by(f64::total_cmp);
    Ok(SpectralSample { eigenvalues: values, provenance: None })
}

/// Right-continuous empirical CDF `F(x) = #{i : lambda_i <= x} / N` on `grid`.
pub fn esd(sample: &SpectralSample, grid: &[f64]) -> Vec<(f64, f64)> {
    let n = sample.len().max(1) as f64;
    grid.iter()
        .map(|&x| {
            let below = sample.eigenvalues.partition_point(|&v| v <= x);
            (x, below as f64 / n)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentSource {
    #[serde(rename = "esd")]
    Esd,
    #[serde(rename = "gw-walks")]
    GwWalks,
}

/// Moments `m_1..m_K`; `moments[k - 1]` holds `m_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub moments: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
    pub source: MomentSource,
    pub sample_count: u64,
}

impl MomentVector {
    pub fn get(&self, k: usize) -> f64 {
        self.moments[k - 1]
    }

    /// `{"1": m_1, "2": m_2, ...}`
    pub fn to_json_map(&self) -> BTreeMap<usize, f64> {
        self.moments.iter().enumerate().map(|(i, &m)| (i + 1, m)).collect()
    }
}

pub fn esd_moments(sample: &SpectralSample, order: usize) -> MomentVector {
    let n = sample.len().max(1) as f64;
    let moments = (1..=order).map(|k| sample.eigenvalues.iter().map(|x| x.powi(k as i32)).sum::<f64>() / n).collect();
    MomentVector { moments, std_errors: None, source: MomentSource::Esd, sample_count: 1 }
}

/// `(1 / N) sum w(S, S')^2`, the second moment straight from the graph.
pub fn frobenius_m2<V: Ord + Clone>(g: &WeightedGraph<V>, full_dim: u64) -> f64 {
    if full_dim == 0 {
        return 0.0;
    }
    g.squared_weight_sum() as f64 / full_dim as f64
}

/// Weighted closed walks of length `1..=order` starting at `root`:
/// `out[k - 1] = (A^k)[root][root]`.
pub fn closed_walks(adjacency: &[Vec<(usize, u32)>], root: usize, order: usize) -> Vec<f64> {
    let half = order.div_ceil(2);
    let mut powers: Vec<HashMap<usize, f64>> = Vec::with_capacity(half + 1);
    powers.push(HashMap::from([(root, 1.0)]));
    for j in 0..half {
        let mut next = HashMap::new();
        for (&u, &x) in &powers[j] {
            for &(v, w) in &adjacency[u] {
                *next.entry(v).or_insert(0.0) += x * w as f64;
            }
        }
        powers.push(next);
    }
    (1..=order)
        .map(|k| {
            let (a, b) = (&powers[k / 2], &powers[k - k / 2]);
            a.iter().map(|(u, x)| x * b.get(u).copied().unwrap_or(0.0)).sum()
        })
        .collect()
}

/// ESD moments without an eigensolver: `m_k = tr(A^k) / N` from closed
/// walks at every stored vertex. Isolated rows add nothing to the traces.
pub fn graph_moments<V: Ord + Clone + Sync>(g: &WeightedGraph<V>, full_dim: u64, order: usize) -> MomentVector {
    let adjacency = g.adjacency();
    let sums = (0..g.stored_count())
        .into_par_iter()
        .filter(|&v| !adjacency[v].is_empty())
        .map(|v| closed_walks(adjacency, v, order))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(vec![0.0; order], |mut acc, walks| {
            acc.iter_mut().zip(walks).for_each(|(a, w)| *a += w);
            acc
        });
    let n = full_dim.max(1) as f64;
    MomentVector {
        moments: sums.into_iter().map(|s| s / n).collect(),
        std_errors: None,
        source: MomentSource::Esd,
        sample_count: 1,
    }
}

/// Monte Carlo moments of the spectral measure at the root of the d-block
/// Galton-Watson tree. Trial `i` uses seed `split_seed(seed, i)` and a tree
/// truncated at depth `ceil(order / 2)`, deep enough for every closed walk
/// of length `order`.
pub fn gw_root_moments(d: u32, lambda: f64, order: usize, trials: usize, seed: u64) -> Result<MomentVector> {
    if trials == 0 || order == 0 {
        return Err(Error::InvalidConfig("gw_root_moments needs trials >= 1 and order >= 1".into()));
    }
    let params = GwParams::new(d, lambda, order.div_ceil(2) as u32)?;
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let tree = sample_gw(&params, split_seed(seed, i))?;
            let mut adjacency = vec![Vec::new(); tree.vertex_count()];
            for (u, v) in tree.edge_pairs() {
                adjacency[u].push((v, 1));
                adjacency[v].push((u, 1));
            }
            Ok(closed_walks(&adjacency, 0, order))
        })
        .collect::<Result<_>>()?;
    let mut moments = Vec::with_capacity(order);
    let mut std_errors = Vec::with_capacity(order);
    for k in 0..order {
        let column: Vec<f64> = per_trial.iter().map(|w| w[k]).collect();
        let (mean, se) = crate::stats::mean_and_se(&column);
        moments.push(mean);
        std_errors.push(se);
    }
    Ok(MomentVector {
        moments,
        std_errors: Some(std_errors),
        source: MomentSource::GwWalks,
        sample_count: trials as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn triangle() -> WeightedGraph<u32> {
        let mut b = GraphBuilder::new();
        b.add_weight(1, 2, 1);
        b.add_weight(2, 3, 1);
        b.add_weight(1, 3, 1);
        b.build(3)
    }

    #[test]
    fn triangle_spectrum_esd_and_moments() {
        let m = adjacency_matrix(&triangle(), 3).unwrap();
        let s = eigenvalues(&m).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[2] - 2.0).abs() < 1e-12);
        let f = esd(&s, &[-5.0, 0.0, 2.0, 9.0]);
        assert_eq!(f[0].1, 0.0);
        assert!((f[1].1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f[2].1, 1.0);
        assert_eq!(f[3].1, 1.0);
        let mv = esd_moments(&s, 3);
        assert!(mv.get(1).abs() < 1e-12);
        assert!((mv.get(2) - 2.0).abs() < 1e-12);
        assert!((mv.get(3) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn padding_adds_zero_eigenvalues() {
        let m = adjacency_matrix(&triangle(), 10).unwrap();
        assert_eq!(m.materialized(), 3);
        let s = eigenvalues(&m).unwrap();
        assert_eq!(s.len(), 10);
        assert!((s.mass_at_zero(1e-9) - 0.7).abs() < 1e-12);
        let g = graph_moments(&triangle(), 10, 3);
        assert!((g.get(2) - 0.6).abs() < 1e-12);
        assert!((g.get(3) - 0.6).abs() < 1e-12);
        assert_eq!(frobenius_m2(&triangle(), 10), 0.6);
    }

    #[test]
    fn empty_graph_is_all_zero() {
        let g: WeightedGraph<u32> = GraphBuilder::new().build(6);
        let s = eigenvalues(&adjacency_matrix(&g, 6).unwrap()).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0; 6]);
    }

    #[test]
    fn dense_cap_is_enforced() {
        let err = adjacency_matrix_capped(&triangle(), 3, 2).unwrap_err();
        assert!(matches!(err, Error::DenseCap { dim: 3, cap: 2 }));
        assert!(adjacency_matrix(&triangle(), 2).is_err());
    }

    #[test]
    fn from_dense_validates() {
        assert!(AdjacencyMatrix::from_dense(2, 2, vec![0, 1, 2, 0]).is_err());
        assert!(AdjacencyMatrix::from_dense(2, 2, vec![1, 0, 0, 0]).is_err());
        let m = AdjacencyMatrix::from_dense(3, 2, vec![0, 4, 4, 0]).unwrap();
        assert_eq!(m.frobenius_sq(), 32);
        assert_eq!(m.get(2, 2), 0);
    }

    #[test]
    fn closed_walks_on_a_path() {
        // 0 - 1 - 2: closed walks at the end vertex are 0,1,0,2,0,4.
        let adj = vec![vec![(1, 1)], vec![(0, 1), (2, 1)], vec![(1, 1)]];
        assert_eq!(closed_walks(&adj, 0, 6), vec![0.0, 1.0, 0.0, 2.0, 0.0, 4.0]);
    }

    #[test]
    fn gw_moments_are_deterministic_and_odd_free_for_trees() {
        let a = gw_root_moments(1, 1.3, 5, 200, 9).unwrap();
        let b = gw_root_moments(1, 1.3, 5, 200, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.get(1), 0.0);
        assert_eq!(a.get(3), 0.0);
        assert_eq!(a.get(5), 0.0);
        assert_eq!(a.source, MomentSource::GwWalks);
    }

    #[test]
    fn histogram_counts_everything() {
        let s = SpectralSample { eigenvalues: vec![-1.0, -1.0, 0.0, 2.0], provenance: None };
        let h = s.histogram(3);
        assert_eq!(h.counts.iter().sum::<u64>(), 4);
        assert_eq!(h.edges.len(), 4);
        assert_eq!(h.counts[2], 1);
    }
}
