//! The d-block Galton-Watson rooted graph and its hypertree realization.
//!
//! Every vertex draws `X ~ Poisson(lambda)` blocks; a block is `d` fresh
//! vertices that together with their parent form a `(d+1)`-clique. Vertices
//! are addressed by the sequence of `(block, position)` pairs leading to
//! them from the root.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{small_binomial, subsets};
use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, RootedWeightedGraph, WeightedGraph};
use crate::hypergraph::{Hypergraph, RSet};
use crate::rng::{rng_from_seed, sample_poisson};

/// Default cap on the expected number of vertices of a sampled tree.
pub const DEFAULT_EXPECTED_SIZE_CAP: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwParams {
    pub d: u32,
    pub lambda: f64,
    pub depth: u32,
}

impl GwParams {
    pub fn new(d: u32, lambda: f64, depth: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidGwParams("block size d must be at least 1".into()));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidGwParams(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(Self { d, lambda, depth })
    }

    /// `sum_{g=0}^{depth} (d * lambda)^g`.
    pub fn expected_size(&self) -> f64 {
        let m = self.d as f64 * self.lambda;
        (0..=self.depth).map(|g| m.powi(g as i32)).sum()
    }
}

/// Position of a vertex: `(block index, index within block)` per generation,
/// both 1-based. The root has the empty address.
///
/// Ordered by generation first and lexicographically within a generation,
/// which is the breadth-first discovery order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(Vec<(u32, u32)>);

impl Address {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn child(&self, block: u32, position: u32) -> Self {
        let mut steps = self.0.clone();
        steps.push((block, position));
        Self(steps)
    }

    pub fn steps(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn generation(&self) -> usize {
        self.0.len()
    }
}

impl Ord for Address {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Address {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "o");
        }
        for (i, (b, j)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "({b},{j})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub parent: usize,
    /// Members are `first..first + d`, in within-block order.
    pub first: usize,
}

/// A truncated d-block Galton-Watson tree. Vertex indices follow
/// breadth-first discovery order, so index 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTreeSample {
    params: GwParams,
    addresses: Vec<Address>,
    generation: Vec<u32>,
    blocks: Vec<Block>,
    child_blocks: Vec<Vec<usize>>,
}

impl BlockTreeSample {
    pub fn params(&self) -> &GwParams {
        &self.params
    }

    pub fn d(&self) -> u32 {
        self.params.d
    }

    pub fn vertex_count(&self) -> usize {
        self.addresses.len()
    }

    pub fn address(&self, v: usize) -> &Address {
        &self.addresses[v]
    }

    pub fn generation(&self, v: usize) -> u32 {
        self.generation[v]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Block ids drawn by `v`, in draw order.
    pub fn child_blocks(&self, v: usize) -> &[usize] {
        &self.child_blocks[v]
    }

    pub fn block_members(&self, block: usize) -> std::ops::Range<usize> {
        let first = self.blocks[block].first;
        first..first + self.params.d as usize
    }

    /// Number of vertices per generation, `Z_0, Z_1, ...`.
    pub fn generation_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.params.depth as usize + 1];
        for &g in &self.generation {
            sizes[g as usize] += 1;
        }
        sizes
    }

    /// Adjacency as `(u, v)` index pairs with `u < v`, one per clique edge.
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (b, block) in self.blocks.iter().enumerate() {
            let members: Vec<usize> = self.block_members(b).collect();
            for (i, &u) in members.iter().enumerate() {
                out.push((block.parent, u));
                for &v in &members[i + 1..] {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// The tree as a rooted weighted graph (all weights 1) labelled by
    /// addresses.
    pub fn graph(&self) -> RootedWeightedGraph<Address> {
        let mut builder = GraphBuilder::new();
        for a in &self.addresses {
            builder.add_vertex(a.clone());
        }
        for (u, v) in self.edge_pairs() {
            builder.add_weight(self.addresses[u].clone(), self.addresses[v].clone(), 1);
        }
        let graph: WeightedGraph<Address> = builder.build(self.addresses.len() as u64);
        RootedWeightedGraph::new(graph, &Address::root()).expect("root is stored")
    }

    /// Stable JSON adjacency list with address labels.
    pub fn to_json(&self) -> Result<String> {
        let mut neighbors = vec![Vec::new(); self.vertex_count()];
        for (u, v) in self.edge_pairs() {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        let vertices: Vec<TreeVertexRepr> = (0..self.vertex_count())
            .map(|v| {
                let mut nb = neighbors[v].clone();
                nb.sort_unstable();
                TreeVertexRepr {
                    id: v,
                    address: self.addresses[v].to_string(),
                    generation: self.generation[v],
                    neighbors: nb,
                }
            })
            .collect();
        let repr =
            TreeRepr { d: self.params.d, lambda: self.params.lambda, depth: self.params.depth, root: 0, vertices };
        Ok(serde_json::to_string(&repr)?)
    }
}

#[derive(Serialize)]
struct TreeVertexRepr {
    id: usize,
    address: String,
    generation: u32,
    neighbors: Vec<usize>,
}

#[derive(Serialize)]
struct TreeRepr {
    d: u32,
    lambda: f64,
    depth: u32,
    root: usize,
    vertices: Vec<TreeVertexRepr>,
}

pub fn sample_gw(params: &GwParams, seed: u64) -> Result<BlockTreeSample> {
    sample_gw_capped(params, seed, DEFAULT_EXPECTED_SIZE_CAP)
}

/// Breadth-first sampling: vertices draw their block counts in index order,
/// and vertices at generation `depth` draw nothing. A shallower sample with
/// the same seed is therefore a prefix of a deeper one.
pub fn sample_gw_capped(params: &GwParams, seed: u64, cap: f64) -> Result<BlockTreeSample> {
    let params = GwParams::new(params.d, params.lambda, params.depth)?;
    let expected = params.expected_size();
    if expected > cap {
        return Err(Error::ExpectedSizeCap { expected, cap });
    }
    let d = params.d;
    let mut rng = rng_from_seed(seed);
    let mut addresses = vec![Address::root()];
    let mut generation = vec![0u32];
    let mut blocks = Vec::new();
    let mut child_blocks = vec![Vec::new()];
    let mut v = 0;
    while v < addresses.len() {
        if generation[v] < params.depth {
            let x = sample_poisson(&mut rng, params.lambda);
            for b in 1..=x as u32 {
                let first = addresses.len();
                child_blocks[v].push(blocks.len());
                blocks.push(Block { parent: v, first });
                for j in 1..=d {
                    addresses.push(addresses[v].child(b, j));
                    generation.push(generation[v] + 1);
                    child_blocks.push(Vec::new());
                }
            }
        }
        v += 1;
    }
    Ok(BlockTreeSample { params, addresses, generation, blocks, child_blocks })
}

/// An r-set rooted k-uniform hypergraph.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedHypergraph {
    pub hypergraph: Hypergraph,
    pub root: RSet,
    /// r-set assigned to each tree vertex (by tree index).
    pub vertex_sets: Vec<RSet>,
}

/// Realizes a block tree as a rooted k-uniform hypertree.
///
/// The root becomes `{1..r}`. Each block of a vertex with r-set `S` becomes
/// a hyperedge `S + (k - r fresh vertices)`, and the block's `d` vertices
/// receive the other r-subsets of that hyperedge in descending
/// lexicographic order. Fresh ids are allocated consecutively from `r + 1`.
pub fn gw_to_hypertree(tree: &BlockTreeSample, k: u32, r: u32) -> Result<RootedHypergraph> {
    if r == 0 || r >= k {
        return Err(Error::InvalidRootSize { r, k });
    }
    let d = tree.d();
    if small_binomial(k as u64, r as u64) != d as u128 + 1 {
        return Err(Error::BlockSizeMismatch { d, k, r });
    }
    let root = RSet::initial(r);
    let mut vertex_sets: Vec<Option<RSet>> = vec![None; tree.vertex_count()];
    vertex_sets[0] = Some(root.clone());
    let mut next_id = r + 1;
    let mut edges = Vec::with_capacity(tree.blocks.len());
    for v in 0..tree.vertex_count() {
        let own = vertex_sets[v].clone().expect("parents precede children");
        for &b in tree.child_blocks(v) {
            let mut edge: Vec<u32> = own.members().to_vec();
            edge.extend(next_id..next_id + (k - r));
            next_id += k - r;
            edge.sort_unstable();
            let mut others: Vec<Vec<u32>> =
                subsets(&edge, r as usize).into_iter().filter(|s| s.as_slice() != own.members()).collect();
            others.reverse();
            for (member, s) in tree.block_members(b).zip(others) {
                vertex_sets[member] = Some(RSet::from_sorted(s));
            }
            edges.push(edge);
        }
    }
    let n = (next_id - 1).max(k);
    edges.sort_unstable();
    Ok(RootedHypergraph {
        hypergraph: Hypergraph::from_sorted_unique(n, k, edges),
        root,
        vertex_sets: vertex_sets.into_iter().map(Option::unwrap).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_trees() {
        let t = sample_gw(&GwParams::new(3, 0.0, 5).unwrap(), 1).unwrap();
        assert_eq!(t.vertex_count(), 1);
        assert_eq!(t.graph().graph().edge_count(), 0);
        let t = sample_gw(&GwParams::new(3, 4.0, 0).unwrap(), 1).unwrap();
        assert_eq!(t.vertex_count(), 1);
    }

    #[test]
    fn invalid_params() {
        assert!(GwParams::new(0, 1.0, 2).is_err());
        assert!(GwParams::new(1, -1.0, 2).is_err());
        let big = GwParams::new(5, 10.0, 8).unwrap();
        assert!(matches!(sample_gw(&big, 0), Err(Error::ExpectedSizeCap { .. })));
    }

    #[test]
    fn generation_recursion_and_cliques() {
        for seed in 0..50 {
            let params = GwParams::new(2, 1.5, 3).unwrap();
            let t = sample_gw(&params, seed).unwrap();
            let sizes = t.generation_sizes();
            for g in 0..3 {
                let blocks: usize = (0..t.vertex_count())
                    .filter(|&v| t.generation(v) == g as u32)
                    .map(|v| t.child_blocks(v).len())
                    .sum();
                assert_eq!(sizes[g + 1], 2 * blocks);
            }
            assert_eq!(t.address(0), &Address::root());
            let g = t.graph();
            assert!(g.graph().edges().all(|(_, _, w)| w == 1));
            assert_eq!(g.graph().edge_count(), t.blocks().len() * 3);
        }
    }

    #[test]
    fn shallower_sample_is_a_prefix() {
        let deep = sample_gw(&GwParams::new(2, 1.2, 4).unwrap(), 77).unwrap();
        let shallow = sample_gw(&GwParams::new(2, 1.2, 3).unwrap(), 77).unwrap();
        assert!(shallow.vertex_count() <= deep.vertex_count());
        for v in 0..shallow.vertex_count() {
            assert_eq!(shallow.address(v), deep.address(v));
        }
        let truncated = (0..deep.vertex_count()).filter(|&v| deep.generation(v) <= 3).count();
        assert_eq!(truncated, shallow.vertex_count());
    }

    #[test]
    fn address_order_is_breadth_first() {
        let a = Address::root().child(2, 1);
        let b = Address::root().child(1, 1).child(1, 1);
        assert!(a < b);
        assert_eq!(b.to_string(), "(1,1).(1,1)");
        let t = sample_gw(&GwParams::new(2, 2.0, 3).unwrap(), 5).unwrap();
        for v in 1..t.vertex_count() {
            assert!(t.address(v - 1) < t.address(v));
        }
    }

    /// Root with one 2-block, k=3, r=2.
    #[test]
    fn hypertree_of_single_block() {
        let tree = BlockTreeSample {
            params: GwParams::new(2, 1.0, 1).unwrap(),
            addresses: vec![Address::root(), Address::root().child(1, 1), Address::root().child(1, 2)],
            generation: vec![0, 1, 1],
            blocks: vec![Block { parent: 0, first: 1 }],
            child_blocks: vec![vec![0], vec![], vec![]],
        };
        let ht = gw_to_hypertree(&tree, 3, 2).unwrap();
        assert_eq!(ht.root.members(), &[1, 2]);
        assert_eq!(ht.hypergraph.edges(), &[vec![1, 2, 3]]);
        assert_eq!(ht.vertex_sets[1].members(), &[2, 3]);
        assert_eq!(ht.vertex_sets[2].members(), &[1, 3]);
    }

    #[test]
    fn hypertree_of_root_only() {
        let t = sample_gw(&GwParams::new(2, 0.0, 2).unwrap(), 0).unwrap();
        let ht = gw_to_hypertree(&t, 3, 1).unwrap();
        assert_eq!(ht.hypergraph.edge_count(), 0);
        assert_eq!(ht.root.members(), &[1]);
    }

    #[test]
    fn hypertree_rejects_wrong_block_size() {
        let t = sample_gw(&GwParams::new(3, 1.0, 2).unwrap(), 0).unwrap();
        assert!(matches!(gw_to_hypertree(&t, 3, 1), Err(Error::BlockSizeMismatch { .. })));
    }

    #[test]
    fn json_export_is_stable() {
        let t = sample_gw(&GwParams::new(2, 1.0, 2).unwrap(), 3).unwrap();
        let a = t.to_json().unwrap();
        assert_eq!(a, sample_gw(&GwParams::new(2, 1.0, 2).unwrap(), 3).unwrap().to_json().unwrap());
        assert!(a.contains("\"address\":\"o\""));
    }
}
