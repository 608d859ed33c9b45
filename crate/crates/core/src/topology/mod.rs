//! Local topology of rooted weighted graphs: balls, isomorphism classes, the
//! local metric, empirical neighbourhood measures and the mass-transport
//! identity.

mod canon;

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, RootedWeightedGraph, WeightedGraph};
use crate::rng::rng_from_seed;

pub use canon::DEFAULT_SIZE_CAP;

/// Isomorphism-invariant encoding of a rooted weighted graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalForm(#[serde(with = "hex_bytes")] Vec<u8>);

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        hex::decode(text).map_err(serde::de::Error::custom)
    }
}

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// First 16 hex digits of the SHA-256 of the code.
    pub fn short_hash(&self) -> String {
        let digest = Sha256::digest(&self.0);
        hex::encode(&digest[..8])
    }
}

/// Index-only view of a ball, cheap to build and to canonicalize.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BallSketch {
    pub vertices: usize,
    pub root: usize,
    pub edges: Vec<(usize, usize, u32)>,
}

impl BallSketch {
    fn isolated() -> Self {
        Self { vertices: 1, root: 0, edges: Vec::new() }
    }

    fn adjacency(&self) -> Vec<Vec<(usize, u32)>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for &(a, b, w) in &self.edges {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        adj
    }

    pub fn canonicalize(&self) -> Result<CanonicalForm> {
        canon::canonical_code(&self.adjacency(), self.root, 0, DEFAULT_SIZE_CAP).map(CanonicalForm)
    }
}

/// Vertices within distance `t` of `root`, in BFS order (root first).
fn ball_vertices(adj: &[Vec<(usize, u32)>], root: usize, t: usize) -> Vec<usize> {
    let mut dist: BTreeMap<usize, usize> = BTreeMap::from([(root, 0)]);
    let mut order = vec![root];
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[&v];
        if dv == t {
            continue;
        }
        for &(w, _) in &adj[v] {
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(w) {
                e.insert(dv + 1);
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    order
}

/// Ball of radius `t` around `root` as an index sketch (root = 0).
pub fn ball_sketch<V: Ord + Clone>(g: &WeightedGraph<V>, root: usize, t: usize) -> BallSketch {
    let adj = g.adjacency();
    let order = ball_vertices(adj, root, t);
    let position: std::collections::HashMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut edges = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        for &(w, wt) in &adj[v] {
            if let Some(&j) = position.get(&w) {
                if i < j {
                    edges.push((i, j, wt));
                }
            }
        }
    }
    BallSketch { vertices: order.len(), root: 0, edges }
}

/// `B_t(o)`: induced weighted subgraph on vertices within graph distance
/// `t` of the root.
pub fn ball<V: Ord + Clone + std::hash::Hash>(g: &RootedWeightedGraph<V>, t: usize) -> RootedWeightedGraph<V> {
    let graph = g.graph();
    let order = ball_vertices(graph.adjacency(), g.root_index(), t);
    let inside: std::collections::HashSet<usize> = order.iter().copied().collect();
    let mut builder = GraphBuilder::new();
    for &v in &order {
        builder.add_vertex(graph.label(v).clone());
        for &(w, wt) in graph.neighbors(v) {
            if v < w && inside.contains(&w) {
                builder.add_weight(graph.label(v).clone(), graph.label(w).clone(), wt);
            }
        }
    }
    let sub = builder.build(order.len() as u64);
    RootedWeightedGraph::new(sub, g.root()).expect("root is in its own ball")
}

pub fn canonicalize<V: Ord + Clone>(g: &RootedWeightedGraph<V>) -> Result<CanonicalForm> {
    canonicalize_capped(g, DEFAULT_SIZE_CAP)
}

pub fn canonicalize_capped<V: Ord + Clone>(g: &RootedWeightedGraph<V>, cap: usize) -> Result<CanonicalForm> {
    let graph = g.graph();
    let extra = graph.vertex_count() - graph.stored_count() as u64;
    canon::canonical_code(graph.adjacency(), g.root_index(), extra, cap).map(CanonicalForm)
}

/// Graphs up to this many vertices are compared by exhaustive search.
const BRUTE_FORCE_LIMIT: usize = 6;

/// Rooted, weight-preserving isomorphism.
pub fn are_isomorphic<V: Ord + Clone, W: Ord + Clone>(
    g1: &RootedWeightedGraph<V>,
    g2: &RootedWeightedGraph<W>,
) -> bool {
    let (a, b) = (g1.graph(), g2.graph());
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let mut wa: Vec<u32> = a.edges().map(|(_, _, w)| w).collect();
    let mut wb: Vec<u32> = b.edges().map(|(_, _, w)| w).collect();
    wa.sort_unstable();
    wb.sort_unstable();
    if wa != wb {
        return false;
    }
    let small = a.vertex_count() as usize <= BRUTE_FORCE_LIMIT && a.stored_count() == b.stored_count();
    if small && a.vertex_count() == a.stored_count() as u64 {
        return canon::brute_force_isomorphic(a.adjacency(), g1.root_index(), b.adjacency(), g2.root_index());
    }
    match (canonicalize(g1), canonicalize(g2)) {
        (Ok(c1), Ok(c2)) => c1 == c2,
        _ => false,
    }
}

/// Local distance `1 / (1 + T)` where `T` is the largest radius at which
/// the two balls are isomorphic; `Identical` when the root components are
/// isomorphic outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalDistance {
    Identical,
    Agree { radius: usize },
}

impl LocalDistance {
    pub fn value(&self) -> f64 {
        match self {
            LocalDistance::Identical => 0.0,
            LocalDistance::Agree { radius } => 1.0 / (1.0 + *radius as f64),
        }
    }

    /// `(numerator, denominator)` of the exact rational value.
    pub fn as_ratio(&self) -> (u64, u64) {
        match self {
            LocalDistance::Identical => (0, 1),
            LocalDistance::Agree { radius } => (1, 1 + *radius as u64),
        }
    }
}

pub fn local_distance<V: Ord + Clone, W: Ord + Clone>(
    g1: &RootedWeightedGraph<V>,
    g2: &RootedWeightedGraph<W>,
) -> Result<LocalDistance> {
    let (a, b) = (g1.graph(), g2.graph());
    let mut t = 0usize;
    loop {
        let s1 = ball_sketch(a, g1.root_index(), t);
        let s2 = ball_sketch(b, g2.root_index(), t);
        if s1.canonicalize()? != s2.canonicalize()? {
            return Ok(LocalDistance::Agree { radius: t - 1 });
        }
        // Saturated: radius t already covers both root components.
        let grow1 = ball_sketch(a, g1.root_index(), t + 1).vertices > s1.vertices;
        let grow2 = ball_sketch(b, g2.root_index(), t + 1).vertices > s2.vertices;
        if !grow1 && !grow2 {
            return Ok(LocalDistance::Identical);
        }
        t += 1;
    }
}

/// Finite-depth marginal of the uniformly rooted neighbourhood measure.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NeighborhoodDistribution {
    pub depth: usize,
    pub counts: BTreeMap<CanonicalForm, u64>,
    pub representatives: BTreeMap<CanonicalForm, BallSketch>,
    pub total: u64,
}

impl NeighborhoodDistribution {
    pub fn new(depth: usize) -> Self {
        Self { depth, ..Default::default() }
    }

    pub fn add(&mut self, sketch: BallSketch, multiplicity: u64) -> Result<()> {
        if multiplicity == 0 {
            return Ok(());
        }
        let code = sketch.canonicalize()?;
        self.add_code(code, sketch, multiplicity);
        Ok(())
    }

    pub(crate) fn add_code(&mut self, code: CanonicalForm, sketch: BallSketch, multiplicity: u64) {
        *self.counts.entry(code.clone()).or_insert(0) += multiplicity;
        self.total += multiplicity;
        match self.representatives.entry(code) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(sketch);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                if sketch < *e.get() {
                    e.insert(sketch);
                }
            }
        }
    }

    /// Commutative, associative merge.
    pub fn merge(&mut self, other: NeighborhoodDistribution) {
        assert_eq!(self.depth, other.depth, "merging measures of different depth");
        for (code, count) in other.counts {
            let sketch = other.representatives[&code].clone();
            self.add_code(code, sketch, count);
        }
    }

    pub fn frequency(&self, code: &CanonicalForm) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts.get(code).copied().unwrap_or(0) as f64 / self.total as f64
    }

    /// Rows `code-hash, count, frequency`, most frequent first.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut rows: Vec<(&CanonicalForm, u64)> = self.counts.iter().map(|(c, &n)| (c, n)).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["code_hash", "count", "frequency"])?;
        for (code, count) in rows {
            w.write_record([code.short_hash(), count.to_string(), format!("{}", count as f64 / self.total as f64)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON object mapping code hash to a representative ball.
    pub fn sidecar_json(&self) -> Result<String> {
        let map: BTreeMap<String, &BallSketch> =
            self.representatives.iter().map(|(c, s)| (c.short_hash(), s)).collect();
        Ok(serde_json::to_string(&map)?)
    }
}

/// Depth-`depth` neighbourhood classes over every vertex of `g`, including
/// the unstored isolated ones.
pub fn empirical_measure<V: Ord + Clone>(g: &WeightedGraph<V>, depth: usize) -> Result<NeighborhoodDistribution> {
    let mut dist = NeighborhoodDistribution::new(depth);
    let mut isolated = g.vertex_count() - g.stored_count() as u64;
    for v in 0..g.stored_count() {
        if g.neighbors(v).is_empty() {
            isolated += 1;
        } else {
            dist.add(ball_sketch(g, v, depth), 1)?;
        }
    }
    dist.add(BallSketch::isolated(), isolated)?;
    Ok(dist)
}

/// Like [`empirical_measure`] but over the given roots; `None` stands for an
/// unstored (isolated) vertex.
pub fn empirical_measure_at<V: Ord + Clone>(
    g: &WeightedGraph<V>,
    depth: usize,
    roots: impl IntoIterator<Item = Option<usize>>,
) -> Result<NeighborhoodDistribution> {
    let mut dist = NeighborhoodDistribution::new(depth);
    let mut isolated = 0u64;
    for root in roots {
        match root {
            Some(v) if !g.neighbors(v).is_empty() => dist.add(ball_sketch(g, v, depth), 1)?,
            _ => isolated += 1,
        }
    }
    dist.add(BallSketch::isolated(), isolated)?;
    Ok(dist)
}

/// Both sides of the mass-transport identity for a uniformly rooted finite
/// graph: mass sent out of the root vs. mass received by it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassTransport {
    pub outgoing: f64,
    pub incoming: f64,
}

impl MassTransport {
    pub fn holds(&self, rel_tol: f64) -> bool {
        let scale = self.outgoing.abs().max(self.incoming.abs());
        (self.outgoing - self.incoming).abs() <= rel_tol * scale
    }
}

/// Non-negative function of `(graph, u, v)`, evaluated on adjacent pairs.
pub type EdgeFunctional<'a> = &'a dyn Fn(&WeightedGraph<u64>, usize, usize) -> f64;

fn transport_sums(g: &WeightedGraph<u64>, f: EdgeFunctional<'_>) -> Result<MassTransport> {
    let n = g.vertex_count() as f64;
    let (mut out, mut inc) = (0.0, 0.0);
    for o in 0..g.stored_count() {
        for &(v, _) in g.neighbors(o) {
            let sent = f(g, o, v);
            let received = f(g, v, o);
            for value in [sent, received] {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(Error::NegativeFunctional { u: o, v, value });
                }
            }
            out += sent;
            inc += received;
        }
    }
    Ok(MassTransport { outgoing: out / n, incoming: inc / n })
}

/// Evaluates both sides of the mass-transport identity exactly on `g`, then
/// on `trials` random relabelings of `g`; every evaluation must satisfy the
/// identity and agree with the first within `1e-12` relative tolerance.
pub fn mass_transport_check<V: Ord + Clone>(
    g: &WeightedGraph<V>,
    f: EdgeFunctional<'_>,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    const TOL: f64 = 1e-12;
    let base_graph = g.relabel(|v| g.index_of(v).unwrap() as u64);
    let base = transport_sums(&base_graph, f)?;
    if !base.holds(TOL) {
        return Ok(false);
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..trials {
        let mut perm: Vec<u64> = (0..g.stored_count() as u64).collect();
        perm.shuffle(&mut rng);
        let relabeled = base_graph.relabel(|&v| perm[v as usize]);
        let sums = transport_sums(&relabeled, f)?;
        let close = |a: f64, b: f64| (a - b).abs() <= TOL * a.abs().max(b.abs());
        if !sums.holds(TOL) || !close(sums.outgoing, base.outgoing) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Both sides of the identity (without relabeling trials).
pub fn mass_transport_sums<V: Ord + Clone>(g: &WeightedGraph<V>, f: EdgeFunctional<'_>) -> Result<MassTransport> {
    let relabeled = g.relabel(|v| g.index_of(v).unwrap() as u64);
    transport_sums(&relabeled, f)
}
