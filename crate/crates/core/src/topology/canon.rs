//! Canonical forms of rooted weighted graphs.
//!
//! The root component is decomposed into its block-cut tree, rooted at the
//! root vertex. A vertex is encoded by the sorted codes of the blocks
//! hanging below it; a block is encoded by an exact canonical labeling of
//! the block's weighted subgraph in which the attachment vertex is
//! individualized and every other vertex is coloured by its own code. The
//! block labeling uses colour refinement with exhaustive
//! individualization-refinement search, so it is exact; the decomposition
//! keeps the search local to single blocks, which in sparse line graphs are
//! small cliques.
//!
//! All parts of a code are length-prefixed, so codes are prefix-free and
//! byte equality is structural equality.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Default maximum number of vertices accepted by [`super::canonicalize`].
pub const DEFAULT_SIZE_CAP: usize = 100_000;

/// Leaf budget of a single individualization-refinement search.
const SEARCH_LEAF_BUDGET: u64 = 5_000_000;

pub(crate) type Adjacency = [Vec<(usize, u32)>];

fn push_u32(out: &mut Vec<u8>, x: u32) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn push_u64(out: &mut Vec<u8>, x: u64) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn push_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    push_u64(out, bytes.len() as u64);
    out.extend_from_slice(bytes);
}

/// Canonical code of the rooted graph `(adj, root)` plus `extra_isolated`
/// unstored isolated vertices.
pub(crate) fn canonical_code(adj: &Adjacency, root: usize, extra_isolated: u64, cap: usize) -> Result<Vec<u8>> {
    let total = adj.len() as u64 + extra_isolated;
    if total > cap as u64 {
        return Err(Error::CanonicalSizeCap { size: total.min(usize::MAX as u64) as usize, cap });
    }
    let mut component = vec![usize::MAX; adj.len()];
    let root_members = collect_component(adj, root, 0, &mut component);
    let mut out = vec![b'R'];
    push_bytes(&mut out, &rooted_component_code(adj, root, &root_members)?);

    let mut isolated = extra_isolated;
    let mut others: Vec<Vec<u8>> = Vec::new();
    for v in 0..adj.len() {
        if component[v] != usize::MAX {
            continue;
        }
        if adj[v].is_empty() {
            component[v] = 1;
            isolated += 1;
            continue;
        }
        let members = collect_component(adj, v, 1, &mut component);
        let colors = vec![0u32; members.len()];
        let (local, _) = induced(adj, &members);
        others.push(colored_code(&local, &colors, &[Vec::new()])?);
    }
    others.sort();
    push_u64(&mut out, isolated);
    push_u64(&mut out, others.len() as u64);
    for c in &others {
        push_bytes(&mut out, c);
    }
    Ok(out)
}

fn collect_component(adj: &Adjacency, start: usize, tag: usize, component: &mut [usize]) -> Vec<usize> {
    let mut members = vec![start];
    component[start] = tag;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &(w, _) in &adj[v] {
            if component[w] == usize::MAX {
                component[w] = tag;
                members.push(w);
                queue.push_back(w);
            }
        }
    }
    members
}

/// Subgraph induced on `members`, re-indexed by position in `members`.
fn induced(adj: &Adjacency, members: &[usize]) -> (Vec<Vec<(usize, u32)>>, Vec<usize>) {
    let mut position = std::collections::HashMap::with_capacity(members.len());
    for (i, &v) in members.iter().enumerate() {
        position.insert(v, i);
    }
    let local = members
        .iter()
        .map(|&v| adj[v].iter().filter_map(|&(w, wt)| position.get(&w).map(|&j| (j, wt))).collect())
        .collect();
    (local, members.to_vec())
}

/// Biconnected components (as vertex lists) of the connected graph
/// containing `root`.
fn biconnected_blocks(adj: &Adjacency, root: usize) -> Vec<Vec<usize>> {
    const UNSET: usize = usize::MAX;
    let mut disc = vec![UNSET; adj.len()];
    let mut low = vec![0usize; adj.len()];
    let mut timer = 0usize;
    let mut blocks = Vec::new();
    let mut edge_stack: Vec<(usize, usize)> = Vec::new();
    // (vertex, parent, next neighbour position)
    let mut stack: Vec<(usize, usize, usize)> = vec![(root, UNSET, 0)];
    disc[root] = timer;
    low[root] = timer;
    timer += 1;
    while let Some(frame) = stack.last_mut() {
        let (v, parent) = (frame.0, frame.1);
        if frame.2 < adj[v].len() {
            let w = adj[v][frame.2].0;
            frame.2 += 1;
            if disc[w] == UNSET {
                edge_stack.push((v, w));
                disc[w] = timer;
                low[w] = timer;
                timer += 1;
                stack.push((w, v, 0));
            } else if w != parent && disc[w] < disc[v] {
                edge_stack.push((v, w));
                low[v] = low[v].min(disc[w]);
            }
        } else {
            stack.pop();
            if let Some(&(u, _, _)) = stack.last() {
                low[u] = low[u].min(low[v]);
                if low[v] >= disc[u] {
                    let mut members = Vec::new();
                    while let Some((a, b)) = edge_stack.pop() {
                        members.push(a);
                        members.push(b);
                        if (a, b) == (u, v) {
                            break;
                        }
                    }
                    members.sort_unstable();
                    members.dedup();
                    blocks.push(members);
                }
            }
        }
    }
    blocks
}

fn rooted_component_code(adj: &Adjacency, root: usize, members: &[usize]) -> Result<Vec<u8>> {
    let blocks = biconnected_blocks(adj, root);
    let mut blocks_of: Vec<Vec<usize>> = vec![Vec::new(); adj.len()];
    for (b, block) in blocks.iter().enumerate() {
        for &v in block {
            blocks_of[v].push(b);
        }
    }
    // Breadth-first order over the block-cut tree: (block, attachment).
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(blocks.len());
    let mut parent_block = vec![usize::MAX; adj.len()];
    let mut block_done = vec![false; blocks.len()];
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &b in &blocks_of[v] {
            if block_done[b] {
                continue;
            }
            block_done[b] = true;
            order.push((b, v));
            for &u in &blocks[b] {
                if u != v {
                    parent_block[u] = b;
                    queue.push_back(u);
                }
            }
        }
    }
    debug_assert!(members.iter().all(|&v| v == root || parent_block[v] != usize::MAX));

    let mut block_code: Vec<Vec<u8>> = vec![Vec::new(); blocks.len()];
    let mut vertex_code: Vec<Vec<u8>> = vec![Vec::new(); adj.len()];
    let encode_vertex = |children: &mut Vec<&[u8]>| {
        children.sort_unstable();
        let mut out = vec![b'V'];
        push_u64(&mut out, children.len() as u64);
        for c in children.iter() {
            push_bytes(&mut out, c);
        }
        out
    };
    for &(b, attach) in order.iter().rev() {
        let block = &blocks[b];
        for &u in block {
            if u == attach {
                continue;
            }
            let mut children: Vec<&[u8]> =
                blocks_of[u].iter().filter(|&&c| c != b).map(|&c| block_code[c].as_slice()).collect();
            vertex_code[u] = encode_vertex(&mut children);
        }
        // Attachment colour "A" sorts before every vertex code ("V...").
        let mut palette: Vec<Vec<u8>> =
            block.iter().map(|&u| if u == attach { b"A".to_vec() } else { vertex_code[u].clone() }).collect();
        let mut distinct = palette.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let colors: Vec<u32> = palette.iter().map(|c| distinct.binary_search(c).unwrap() as u32).collect();
        palette.clear();
        let (local, _) = induced(adj, block);
        block_code[b] = colored_code(&local, &colors, &distinct)?;
        for &u in block {
            if u != attach {
                vertex_code[u].clear();
            }
        }
    }
    let mut root_children: Vec<&[u8]> = blocks_of[root].iter().map(|&c| block_code[c].as_slice()).collect();
    Ok(encode_vertex(&mut root_children))
}

/// Exact canonical code of a vertex-coloured weighted graph. `colors` are
/// dense ranks into `palette`, whose order is canonical.
fn colored_code(adj: &Adjacency, colors: &[u32], palette: &[Vec<u8>]) -> Result<Vec<u8>> {
    let m = adj.len();
    let mut best: Option<Vec<u8>> = None;
    let mut leaves = 0u64;
    let initial = colors.to_vec();
    search(adj, initial.clone(), &initial, &mut best, &mut leaves)?;
    let mut out = vec![b'B'];
    push_u64(&mut out, m as u64);
    push_u64(&mut out, palette.len() as u64);
    for c in palette {
        push_bytes(&mut out, c);
    }
    out.extend_from_slice(&best.expect("search visits at least one leaf"));
    Ok(out)
}

/// Re-ranks `keys` densely, preserving their order.
fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> (Vec<u32>, usize) {
    let mut distinct: Vec<K> = keys.to_vec();
    distinct.sort();
    distinct.dedup();
    let ranks = keys.iter().map(|k| distinct.binary_search(k).unwrap() as u32).collect();
    (ranks, distinct.len())
}

/// Colour refinement to the coarsest equitable refinement. Colours keep
/// their relative order, so the result is labeling-independent.
fn refine(adj: &Adjacency, colors: &mut Vec<u32>) {
    let mut classes = {
        let mut c = colors.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    };
    loop {
        let sigs: Vec<(u32, Vec<(u32, u32)>)> = (0..adj.len())
            .map(|v| {
                let mut nb: Vec<(u32, u32)> = adj[v].iter().map(|&(w, wt)| (colors[w], wt)).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let (ranks, count) = dense_ranks(&sigs);
        *colors = ranks;
        if count == classes {
            return;
        }
        classes = count;
    }
}

fn search(
    adj: &Adjacency,
    mut colors: Vec<u32>,
    initial: &[u32],
    best: &mut Option<Vec<u8>>,
    leaves: &mut u64,
) -> Result<()> {
    refine(adj, &mut colors);
    let m = adj.len();
    let mut cell_sizes = vec![0usize; m];
    for &c in &colors {
        cell_sizes[c as usize] += 1;
    }
    match cell_sizes.iter().position(|&s| s > 1) {
        None => {
            *leaves += 1;
            if *leaves > SEARCH_LEAF_BUDGET {
                return Err(Error::CanonicalSearchBudget(SEARCH_LEAF_BUDGET));
            }
            let code = leaf_code(adj, &colors, initial);
            if best.as_ref().is_none_or(|b| code < *b) {
                *best = Some(code);
            }
            Ok(())
        }
        Some(target) => {
            let target = target as u32;
            for v in (0..m).filter(|&v| colors[v] == target) {
                let keys: Vec<(u32, u8)> =
                    (0..m).map(|u| (colors[u], u8::from(colors[u] == target && u != v))).collect();
                let (next, _) = dense_ranks(&keys);
                search(adj, next, initial, best, leaves)?;
            }
            Ok(())
        }
    }
}

/// Labeling `v -> colors[v]` (a permutation): initial colours by position,
/// then the sorted weighted edge list.
fn leaf_code(adj: &Adjacency, colors: &[u32], initial: &[u32]) -> Vec<u8> {
    let m = adj.len();
    let mut by_position = vec![0u32; m];
    for v in 0..m {
        by_position[colors[v] as usize] = initial[v];
    }
    let mut edges: Vec<(u32, u32, u32)> = Vec::new();
    for v in 0..m {
        for &(w, wt) in &adj[v] {
            let (a, b) = (colors[v], colors[w]);
            if a < b {
                edges.push((a, b, wt));
            }
        }
    }
    edges.sort_unstable();
    let mut out = Vec::with_capacity(4 * m + 12 * edges.len() + 8);
    for c in by_position {
        push_u32(&mut out, c);
    }
    push_u64(&mut out, edges.len() as u64);
    for (a, b, w) in edges {
        push_u32(&mut out, a);
        push_u32(&mut out, b);
        push_u32(&mut out, w);
    }
    out
}

/// Exhaustive root- and weight-preserving bijection search.
pub(crate) fn brute_force_isomorphic(a: &Adjacency, root_a: usize, b: &Adjacency, root_b: usize) -> bool {
    let m = a.len();
    if m != b.len() {
        return false;
    }
    let weight = |adj: &Adjacency, u: usize, v: usize| adj[u].iter().find(|&&(w, _)| w == v).map_or(0, |&(_, wt)| wt);
    let degree_sig = |adj: &Adjacency, v: usize| {
        let mut s: Vec<u32> = adj[v].iter().map(|&(_, w)| w).collect();
        s.sort_unstable();
        s
    };
    let sig_a: Vec<Vec<u32>> = (0..m).map(|v| degree_sig(a, v)).collect();
    let sig_b: Vec<Vec<u32>> = (0..m).map(|v| degree_sig(b, v)).collect();
    let mut map = vec![usize::MAX; m];
    let mut used = vec![false; m];
    // Map vertices of `a` in order root, then the rest.
    let order: Vec<usize> = std::iter::once(root_a).chain((0..m).filter(|&v| v != root_a)).collect();

    fn extend(
        pos: usize,
        order: &[usize],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ok: &dyn Fn(usize, usize, &[usize]) -> bool,
        candidates: &dyn Fn(usize) -> Vec<usize>,
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let v = order[pos];
        for c in candidates(pos) {
            if used[c] || !ok(v, c, map) {
                continue;
            }
            map[v] = c;
            used[c] = true;
            if extend(pos + 1, order, map, used, ok, candidates) {
                return true;
            }
            map[v] = usize::MAX;
            used[c] = false;
        }
        false
    }

    let ok = |v: usize, c: usize, map: &[usize]| {
        if sig_a[v] != sig_b[c] {
            return false;
        }
        (0..m).all(|u| map[u] == usize::MAX || weight(a, v, u) == weight(b, c, map[u]))
    };
    let candidates = |pos: usize| -> Vec<usize> {
        if pos == 0 {
            vec![root_b]
        } else {
            (0..m).filter(|&c| c != root_b).collect()
        }
    };
    extend(0, &order, &mut map, &mut used, &ok, &candidates)
}
