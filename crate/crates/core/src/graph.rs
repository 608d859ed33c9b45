//! Symmetric integer-weighted graphs and their rooted variant.

use std::collections::HashMap;
use std::hash::Hash;

/// Undirected graph with positive integer edge weights and no self-loops.
///
/// Only vertices that were explicitly added (or touch an edge) are stored;
/// `vertex_count` may exceed the number of stored vertices, the remainder
/// being isolated vertices that are never materialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph<V> {
    labels: Vec<V>,
    adjacency: Vec<Vec<(usize, u32)>>,
    vertex_count: u64,
}

impl<V: Ord + Clone> WeightedGraph<V> {
    pub fn vertex_count(&self) -> u64 {
        self.vertex_count
    }

    /// Stored vertices, sorted ascending.
    pub fn labels(&self) -> &[V] {
        &self.labels
    }

    pub fn stored_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, idx: usize) -> &V {
        &self.labels[idx]
    }

    pub fn index_of(&self, v: &V) -> Option<usize> {
        self.labels.binary_search(v).ok()
    }

    /// Neighbours of a stored vertex as `(index, weight)`, sorted by index.
    pub fn neighbors(&self, idx: usize) -> &[(usize, u32)] {
        &self.adjacency[idx]
    }

    pub fn adjacency(&self) -> &[Vec<(usize, u32)>] {
        &self.adjacency
    }

    pub fn weight(&self, a: usize, b: usize) -> u32 {
        let row = &self.adjacency[a];
        match row.binary_search_by_key(&b, |&(j, _)| j) {
            Ok(pos) => row[pos].1,
            Err(_) => 0,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(i, j, w)` with `i < j`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().filter(move |&&(j, _)| j > i).map(move |&(j, w)| (i, j, w)))
    }

    pub fn total_weight(&self) -> u64 {
        self.edges().map(|(_, _, w)| w as u64).sum()
    }

    /// Sum of squared weights over ordered pairs, `sum_{u,v} w(u,v)^2`.
    pub fn squared_weight_sum(&self) -> u64 {
        2 * self.edges().map(|(_, _, w)| (w as u64).pow(2)).sum::<u64>()
    }

    pub(crate) fn from_parts(labels: Vec<V>, adjacency: Vec<Vec<(usize, u32)>>, vertex_count: u64) -> Self {
        debug_assert_eq!(labels.len(), adjacency.len());
        debug_assert!(vertex_count >= labels.len() as u64);
        Self { labels, adjacency, vertex_count }
    }

    /// Same graph with stored vertices renamed by `f`, which must be
    /// injective on the stored labels.
    pub fn relabel<W: Ord + Clone + Hash>(&self, mut f: impl FnMut(&V) -> W) -> WeightedGraph<W> {
        let mut builder = GraphBuilder::new();
        for v in &self.labels {
            builder.add_vertex(f(v));
        }
        for (i, j, w) in self.edges() {
            builder.add_weight(f(&self.labels[i]), f(&self.labels[j]), w);
        }
        builder.build(self.vertex_count)
    }
}

/// Accumulates weight increments on unordered pairs.
#[derive(Debug, Clone)]
pub struct GraphBuilder<V> {
    ids: HashMap<V, usize>,
    labels: Vec<V>,
    weights: HashMap<(usize, usize), u32>,
}

impl<V: Ord + Clone + Hash> Default for GraphBuilder<V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V: Ord + Clone + Hash> GraphBuilder<V> {
    pub fn new() -> Self {
        Self { ids: HashMap::new(), labels: Vec::new(), weights: HashMap::new() }
    }

    pub fn add_vertex(&mut self, v: V) -> usize {
        if let Some(&id) = self.ids.get(&v) {
            return id;
        }
        let id = self.labels.len();
        self.ids.insert(v.clone(), id);
        self.labels.push(v);
        id
    }

    /// Adds `w` to the weight of `{a, b}`. Self-loops are ignored.
    pub fn add_weight(&mut self, a: V, b: V, w: u32) {
        let ia = self.add_vertex(a);
        let ib = self.add_vertex(b);
        if ia == ib || w == 0 {
            return;
        }
        let key = (ia.min(ib), ia.max(ib));
        *self.weights.entry(key).or_insert(0) += w;
    }

    /// Finalizes with `vertex_count` total vertices (at least the stored ones).
    pub fn build(self, vertex_count: u64) -> WeightedGraph<V> {
        let mut order: Vec<usize> = (0..self.labels.len()).collect();
        order.sort_by(|&a, &b| self.labels[a].cmp(&self.labels[b]));
        let mut new_id = vec![0usize; order.len()];
        for (pos, &old) in order.iter().enumerate() {
            new_id[old] = pos;
        }
        let mut adjacency = vec![Vec::new(); order.len()];
        for (&(a, b), &w) in &self.weights {
            let (na, nb) = (new_id[a], new_id[b]);
            adjacency[na].push((nb, w));
            adjacency[nb].push((na, w));
        }
        for row in &mut adjacency {
            row.sort_unstable();
        }
        let mut labels_opt: Vec<Option<V>> = self.labels.into_iter().map(Some).collect();
        let labels: Vec<V> = order.iter().map(|&old| labels_opt[old].take().unwrap()).collect();
        let vertex_count = vertex_count.max(labels.len() as u64);
        WeightedGraph::from_parts(labels, adjacency, vertex_count)
    }
}

/// A weighted graph with a distinguished stored root vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedWeightedGraph<V> {
    graph: WeightedGraph<V>,
    root: usize,
}

impl<V: Ord + Clone> RootedWeightedGraph<V> {
    /// `None` when `root` is not a stored vertex of `graph`.
    pub fn new(graph: WeightedGraph<V>, root: &V) -> Option<Self> {
        let root = graph.index_of(root)?;
        Some(Self { graph, root })
    }

    pub fn graph(&self) -> &WeightedGraph<V> {
        &self.graph
    }

    pub fn root_index(&self) -> usize {
        self.root
    }

    pub fn root(&self) -> &V {
        self.graph.label(self.root)
    }
}
