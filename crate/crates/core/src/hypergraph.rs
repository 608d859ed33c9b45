//! k-uniform hypergraphs, the `H(n, k, p)` sampler, r-set degrees and the
//! r-set weighted line graph.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, checked_binomial, small_binomial, subsets, unrank_combination};
use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, WeightedGraph};
use crate::rng::{geometric_skip, rng_from_seed};

/// Edge probabilities below this use geometric skip-sampling.
pub const SKIP_SAMPLING_THRESHOLD: f64 = 0.01;

/// A strictly increasing tuple of 1-based vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RSet(Vec<u32>);

impl RSet {
    pub fn new(mut members: Vec<u32>) -> Result<Self> {
        members.sort_unstable();
        if members.is_empty() || members[0] == 0 || members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidRSet(members));
        }
        Ok(Self(members))
    }

    /// `{1, ..., r}`.
    pub fn initial(r: u32) -> Self {
        Self((1..=r).collect())
    }

    pub(crate) fn from_sorted(members: Vec<u32>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Self(members)
    }

    pub fn members(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether every member occurs in the sorted slice `edge`.
    pub fn is_subset_of(&self, edge: &[u32]) -> bool {
        self.0.iter().all(|v| edge.binary_search(v).is_ok())
    }
}

impl fmt::Display for RSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Resolved parameters of `H(n, k, p)` together with the r-set scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u32,
    pub k: u32,
    pub r: u32,
    pub lambda: f64,
    pub p: f64,
}

fn check_shape(n: u32, k: u32, r: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidUniformity(k));
    }
    if k > n {
        return Err(Error::KExceedsN { k, n });
    }
    if r == 0 || r >= k {
        return Err(Error::InvalidRootSize { r, k });
    }
    Ok(())
}

impl ModelParams {
    /// Sets `p = lambda / C(n-r, k-r)` so that every r-set has expected
    /// degree `lambda`.
    pub fn resolve(n: u32, k: u32, r: u32, lambda: f64) -> Result<Self> {
        check_shape(n, k, r)?;
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidLambda(lambda));
        }
        let trials = binomial((n - r) as u64, (k - r) as u64)?;
        if lambda > trials as f64 {
            return Err(Error::LambdaTooLarge { lambda, trials });
        }
        Ok(Self { n, k, r, lambda, p: lambda / trials as f64 })
    }

    /// Direct edge probability; `lambda` is derived as `p * C(n-r, k-r)`.
    pub fn with_probability(n: u32, k: u32, r: u32, p: f64) -> Result<Self> {
        check_shape(n, k, r)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        let trials = binomial((n - r) as u64, (k - r) as u64)?;
        Ok(Self { n, k, r, lambda: p * trials as f64, p })
    }

    /// `C(n-r, k-r)`: number of potential hyperedges through a fixed r-set.
    pub fn degree_trials(&self) -> u128 {
        small_binomial((self.n - self.r) as u64, (self.k - self.r) as u64)
    }

    /// `C(n, r)`: number of vertices of the r-set line graph.
    pub fn rset_count(&self) -> Result<u128> {
        binomial(self.n as u64, self.r as u64)
    }

    /// `C(n, k)`: number of potential hyperedges.
    pub fn potential_edges(&self) -> Result<u128> {
        binomial(self.n as u64, self.k as u64)
    }

    /// `C(k, r) - 1`: block size of the matching Galton-Watson limit.
    pub fn block_size(&self) -> u32 {
        (small_binomial(self.k as u64, self.r as u64) - 1) as u32
    }
}

/// A k-uniform hypergraph on vertices `1..=n` with set semantics on edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: u32,
    k: u32,
    edges: Vec<Vec<u32>>,
    incidence: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct HypergraphRepr {
    n: u32,
    k: u32,
    edges: Vec<Vec<u32>>,
}

impl Hypergraph {
    /// Validates and normalizes: members and edges are sorted, duplicates
    /// rejected.
    pub fn new(n: u32, k: u32, edges: Vec<Vec<u32>>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidUniformity(k));
        }
        if k > n {
            return Err(Error::KExceedsN { k, n });
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for mut e in edges {
            e.sort_unstable();
            if e.len() != k as usize {
                return Err(Error::InvalidEdge { edge: e, reason: "wrong cardinality" });
            }
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidEdge { edge: e, reason: "repeated vertex" });
            }
            if e[0] == 0 || e[e.len() - 1] > n {
                return Err(Error::InvalidEdge { edge: e, reason: "vertex out of range" });
            }
            normalized.push(e);
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidEdge { edge: w[0].clone(), reason: "duplicate hyperedge" });
        }
        Ok(Self::from_sorted_unique(n, k, normalized))
    }

    pub(crate) fn from_sorted_unique(n: u32, k: u32, edges: Vec<Vec<u32>>) -> Self {
        let mut incidence = vec![Vec::new(); n as usize];
        for (i, e) in edges.iter().enumerate() {
            for &v in e {
                incidence[(v - 1) as usize].push(i as u32);
            }
        }
        Self { n, k, edges, incidence }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Hyperedges in lexicographic order.
    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Indices of hyperedges containing every member of `s`, ascending.
    pub fn edges_containing(&self, s: &RSet) -> Vec<usize> {
        let Some(&first) = s.members().first() else {
            return (0..self.edges.len()).collect();
        };
        if first == 0 || first > self.n {
            return Vec::new();
        }
        self.incidence[(first - 1) as usize]
            .iter()
            .map(|&i| i as usize)
            .filter(|&i| s.is_subset_of(&self.edges[i]))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let repr = HypergraphRepr { n: self.n, k: self.k, edges: self.edges.clone() };
        Ok(serde_json::to_string(&repr)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: HypergraphRepr = serde_json::from_str(text)?;
        Self::new(repr.n, repr.k, repr.edges)
    }
}

/// Samples `H(n, k, p)`: each k-set is a hyperedge independently with
/// probability `p`.
///
/// The k-sets are visited in lexicographic order. Below
/// [`SKIP_SAMPLING_THRESHOLD`] the gaps between successes are drawn from the
/// geometric law and the next edge is found by unranking; otherwise every
/// k-set gets its own Bernoulli trial.
pub fn sample_hypergraph(params: &ModelParams, seed: u64) -> Result<Hypergraph> {
    let (n, k, p) = (params.n, params.k, params.p);
    let total = params.potential_edges()?;
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    if p <= 0.0 {
        // no edges
    } else if p >= 1.0 {
        let all: Vec<u32> = (1..=n).collect();
        edges = subsets(&all, k as usize);
    } else if p < SKIP_SAMPLING_THRESHOLD {
        let mut next: u128 = 0;
        loop {
            let gap = geometric_skip(&mut rng, p);
            next = match next.checked_add(gap) {
                Some(x) if x < total => x,
                _ => break,
            };
            edges.push(unrank_combination(n, k, next));
            next += 1;
        }
    } else {
        let mut current: Vec<u32> = (1..=k).collect();
        for _ in 0..total {
            if rng.gen::<f64>() < p {
                edges.push(current.clone());
            }
            advance_combination(&mut current, n);
        }
    }
    Ok(Hypergraph::from_sorted_unique(n, k, edges))
}

/// Lexicographic successor in place; no-op on the last combination.
fn advance_combination(c: &mut [u32], n: u32) {
    let k = c.len();
    let mut i = k;
    while i > 0 && c[i - 1] == n - (k - i) as u32 {
        i -= 1;
    }
    if i == 0 {
        return;
    }
    c[i - 1] += 1;
    for j in i..k {
        c[j] = c[j - 1] + 1;
    }
}

/// `D_S`: number of hyperedges containing the r-set `s`.
pub fn degree(h: &Hypergraph, s: &RSet) -> usize {
    h.edges_containing(s).len()
}

/// r-set weighted line graph: vertices are all `C(n, r)` r-sets, and
/// `w(S1, S2)` counts hyperedges containing both. Isolated r-sets are
/// counted in `vertex_count` but not stored.
pub fn build_r_line_graph(h: &Hypergraph, r: u32) -> Result<WeightedGraph<RSet>> {
    if r == 0 || r >= h.k {
        return Err(Error::InvalidRootSize { r, k: h.k });
    }
    let vertex_count = checked_binomial(h.n as u64, r as u64)
        .and_then(|c| u64::try_from(c).ok())
        .ok_or(Error::BinomialOverflow { n: h.n as u64, k: r as u64 })?;
    let mut builder = GraphBuilder::new();
    for e in &h.edges {
        let parts: Vec<RSet> = subsets(e, r as usize).into_iter().map(RSet::from_sorted).collect();
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                builder.add_weight(parts[i].clone(), parts[j].clone(), 1);
            }
        }
    }
    Ok(builder.build(vertex_count))
}

/// Degrees of every r-set touched by some hyperedge.
pub fn rset_degrees(h: &Hypergraph, r: u32) -> HashMap<RSet, usize> {
    let mut out = HashMap::new();
    for e in &h.edges {
        for s in subsets(e, r as usize) {
            *out.entry(RSet::from_sorted(s)).or_insert(0) += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(n: u32, k: u32, edges: &[&[u32]]) -> Hypergraph {
        Hypergraph::new(n, k, edges.iter().map(|e| e.to_vec()).collect()).unwrap()
    }

    #[test]
    fn resolve_examples() {
        let p = ModelParams::resolve(5, 2, 1, 4.0).unwrap();
        assert_eq!(p.p, 1.0);
        let p = ModelParams::resolve(10, 3, 1, 2.0).unwrap();
        assert_eq!(p.p, 2.0 / 36.0);
        let p = ModelParams::resolve(10, 3, 2, 2.0).unwrap();
        assert_eq!(p.p, 0.25);
    }

    #[test]
    fn resolve_rejects_bad_shapes() {
        assert!(matches!(ModelParams::resolve(5, 2, 1, 4.5), Err(Error::LambdaTooLarge { .. })));
        assert!(matches!(ModelParams::resolve(5, 7, 1, 1.0), Err(Error::KExceedsN { .. })));
        assert!(matches!(ModelParams::resolve(5, 3, 3, 1.0), Err(Error::InvalidRootSize { .. })));
        assert!(matches!(ModelParams::resolve(5, 3, 0, 1.0), Err(Error::InvalidRootSize { .. })));
        assert!(ModelParams::resolve(5, 3, 1, -1.0).is_err());
    }

    #[test]
    fn hypergraph_validation() {
        assert!(Hypergraph::new(4, 3, vec![vec![1, 2]]).is_err());
        assert!(Hypergraph::new(4, 3, vec![vec![1, 2, 2]]).is_err());
        assert!(Hypergraph::new(4, 3, vec![vec![1, 2, 5]]).is_err());
        assert!(Hypergraph::new(4, 3, vec![vec![1, 2, 3], vec![3, 2, 1]]).is_err());
        let g = Hypergraph::new(4, 3, vec![vec![4, 2, 1], vec![3, 2, 1]]).unwrap();
        assert_eq!(g.edges(), &[vec![1, 2, 3], vec![1, 2, 4]]);
    }

    #[test]
    fn json_is_canonical() {
        let a = Hypergraph::new(5, 3, vec![vec![5, 3, 2], vec![1, 2, 3]]).unwrap();
        let b = Hypergraph::new(5, 3, vec![vec![1, 3, 2], vec![2, 5, 3]]).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.to_json().unwrap(), r#"{"n":5,"k":3,"edges":[[1,2,3],[2,3,5]]}"#);
        assert_eq!(Hypergraph::from_json(&a.to_json().unwrap()).unwrap(), a);
    }

    #[test]
    fn sampler_extremes() {
        let zero = ModelParams::with_probability(10, 3, 1, 0.0).unwrap();
        assert_eq!(sample_hypergraph(&zero, 1).unwrap().edge_count(), 0);
        let one = ModelParams::with_probability(7, 3, 1, 1.0).unwrap();
        assert_eq!(sample_hypergraph(&one, 1).unwrap().edge_count(), 35);
    }

    #[test]
    fn sampler_is_deterministic() {
        let params = ModelParams::resolve(60, 3, 1, 2.0).unwrap();
        assert_eq!(sample_hypergraph(&params, 9).unwrap(), sample_hypergraph(&params, 9).unwrap());
        assert_ne!(sample_hypergraph(&params, 9).unwrap(), sample_hypergraph(&params, 10).unwrap());
        let dense = ModelParams::with_probability(12, 3, 1, 0.3).unwrap();
        assert_eq!(sample_hypergraph(&dense, 4).unwrap(), sample_hypergraph(&dense, 4).unwrap());
    }

    #[test]
    fn degree_examples() {
        let g = h(4, 3, &[&[1, 2, 3], &[1, 2, 4]]);
        assert_eq!(degree(&g, &RSet::new(vec![1, 2]).unwrap()), 2);
        assert_eq!(degree(&g, &RSet::new(vec![3, 4]).unwrap()), 0);
        assert_eq!(degree(&g, &RSet::new(vec![4]).unwrap()), 1);
        let empty = h(4, 3, &[]);
        assert_eq!(degree(&empty, &RSet::new(vec![1, 2]).unwrap()), 0);
    }

    #[test]
    fn line_graph_of_three_triangles() {
        let g = h(5, 3, &[&[1, 2, 3], &[2, 3, 5], &[2, 4, 5]]);
        let lg = build_r_line_graph(&g, 2).unwrap();
        assert_eq!(lg.vertex_count(), 10);
        // {2,3} is shared by the first two hyperedges.
        assert_eq!(lg.stored_count(), 7);
        assert_eq!(lg.edge_count(), 9);
        assert!(lg.edges().all(|(_, _, w)| w == 1));
        let idx = |m: &[u32]| lg.index_of(&RSet::new(m.to_vec()).unwrap()).unwrap();
        assert_eq!(lg.weight(idx(&[1, 2]), idx(&[1, 3])), 1);
        assert_eq!(lg.weight(idx(&[2, 3]), idx(&[3, 5])), 1);
        assert_eq!(lg.weight(idx(&[1, 2]), idx(&[2, 5])), 0);
        assert_eq!(lg.neighbors(idx(&[2, 3])).len(), 4);
    }

    #[test]
    fn line_graph_k2_is_the_graph() {
        let g = h(4, 2, &[&[1, 2], &[2, 3], &[1, 4]]);
        let lg = build_r_line_graph(&g, 1).unwrap();
        assert_eq!(lg.edge_count(), 3);
        assert!(lg.edges().all(|(_, _, w)| w == 1));
    }

    #[test]
    fn line_graph_weights_count_shared_edges() {
        let g = h(4, 3, &[&[1, 2, 3], &[1, 2, 4]]);
        let lg = build_r_line_graph(&g, 1).unwrap();
        let i = |v: u32| lg.index_of(&RSet::new(vec![v]).unwrap()).unwrap();
        assert_eq!(lg.weight(i(1), i(2)), 2);
        assert_eq!(lg.weight(i(3), i(4)), 0);
        assert!(build_r_line_graph(&g, 3).is_err());
    }

    #[test]
    fn advance_walks_all_combinations() {
        let mut c = vec![1, 2, 3];
        let mut count = 1;
        while c != vec![4, 5, 6] {
            advance_combination(&mut c, 6);
            count += 1;
        }
        assert_eq!(count, 20);
    }
}
