//! Breadth-first exploration of an r-set rooted hypergraph.
//!
//! State kept per step `t` (after exploring `v_t`):
//! - `A_t`: discovered, not yet explored r-sets (a FIFO queue; discovery
//!   order equals address order),
//! - `C_t`: explored r-sets, `|C_t| = t`,
//! - `U_t`: vertices of `[n]` not contained in any discovered r-set or
//!   covered hyperedge,
//! - `CE_t` / `UE_t`: covered / unexplored hyperedges,
//! - `R_t = E_{v_t}(H) ∩ UE_{t-1}`, enumerated lexicographically.

use std::collections::{HashSet, VecDeque};
use std::io::Write;

use crate::combinatorics::{checked_binomial, subsets};
use crate::error::Result;
use crate::hypergraph::{Hypergraph, RSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplorationStep {
    pub t: usize,
    /// `v_t`.
    pub explored: RSet,
    /// `|A_t|`, counted in r-sets.
    pub active_count: usize,
    /// `|U_t|`, counted in vertices.
    pub unexplored_count: usize,
    /// `|C_t|`.
    pub covered_count: usize,
    /// `R_t`.
    pub unexplored_edges: Vec<Vec<u32>>,
    /// `J_t`: r-sets first discovered at this step, in discovery order.
    pub discovered: Vec<RSet>,
    /// `X_t = |J_t|`.
    pub x: usize,
    /// `Y_t`: `|E_{v_t}(H)|` at the root step, `|E_{v_t}(H)| - 1` after.
    pub y: usize,
    /// `Z_t = |R_t|`.
    pub z: usize,
    /// Some `e ∈ R_t` has `|e \ U_{t-1}| > r`.
    pub edge_escapes: bool,
    /// Two distinct `e, e' ∈ R_t` have `|e ∩ e'| > r`.
    pub edge_overlap: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplorationTrace {
    pub n: u32,
    pub k: u32,
    pub r: u32,
    pub root: RSet,
    pub steps: Vec<ExplorationStep>,
    /// `t_0`, the step after which no active r-set remains.
    pub terminated_at: Option<usize>,
    /// Stopped by `max_steps` with active r-sets left.
    pub truncated: bool,
}

impl ExplorationTrace {
    /// Members of `A_t` in queue order (`t = 0` is the root alone).
    pub fn active_members(&self, t: usize) -> Vec<RSet> {
        let mut queue: VecDeque<RSet> = VecDeque::from([self.root.clone()]);
        for step in self.steps.iter().take(t) {
            queue.pop_front();
            queue.extend(step.discovered.iter().cloned());
        }
        queue.into_iter().collect()
    }

    /// Hyperedges reached from the root, i.e. the union of all `R_t`.
    pub fn covered_edges(&self) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = self.steps.iter().flat_map(|s| s.unexplored_edges.iter().cloned()).collect();
        out.sort_unstable();
        out
    }

    /// CSV with one row per step.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "t",
            "A_t",
            "U_t",
            "C_t",
            "R_t",
            "X_t",
            "Y_t",
            "Z_t",
            "y_neq_z",
            "edge_escapes",
            "edge_overlap",
        ])?;
        for s in &self.steps {
            w.write_record([
                s.t.to_string(),
                s.active_count.to_string(),
                s.unexplored_count.to_string(),
                s.covered_count.to_string(),
                s.z.to_string(),
                s.x.to_string(),
                s.y.to_string(),
                s.z.to_string(),
                u8::from(s.y != s.z).to_string(),
                u8::from(s.edge_escapes).to_string(),
                u8::from(s.edge_overlap).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Default step budget: `C(n, r)`, the vertex count of the line graph.
pub fn default_max_steps(n: u32, r: u32) -> usize {
    checked_binomial(n as u64, r as u64).and_then(|c| usize::try_from(c).ok()).unwrap_or(usize::MAX)
}

fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Runs the exploration from `root` for at most `max_steps` steps.
pub fn explore(h: &Hypergraph, root: &RSet, max_steps: usize) -> ExplorationTrace {
    let r = root.len();
    let n = h.n() as usize;
    let mut unexplored = vec![true; n + 1];
    unexplored[0] = false;
    let mut unexplored_count = n;
    for &v in root.members() {
        if unexplored[v as usize] {
            unexplored[v as usize] = false;
            unexplored_count -= 1;
        }
    }
    let mut edge_unexplored = vec![true; h.edge_count()];
    let mut seen: HashSet<RSet> = HashSet::from([root.clone()]);
    let mut active: VecDeque<RSet> = VecDeque::from([root.clone()]);
    let mut steps = Vec::new();
    let mut t = 0usize;

    while t < max_steps {
        let Some(v) = active.pop_front() else { break };
        t += 1;
        let star = h.edges_containing(&v);
        let y = if t == 1 { star.len() } else { star.len().saturating_sub(1) };
        let fresh: Vec<usize> = star.into_iter().filter(|&i| edge_unexplored[i]).collect();
        let edges: Vec<Vec<u32>> = fresh.iter().map(|&i| h.edges()[i].clone()).collect();

        let edge_escapes = edges.iter().any(|e| e.iter().filter(|&&u| !unexplored[u as usize]).count() > r);
        let edge_overlap =
            edges.iter().enumerate().any(|(i, e)| edges[i + 1..].iter().any(|f| intersection_size(e, f) > r));

        let mut discovered = Vec::new();
        for e in &edges {
            for s in subsets(e, r) {
                let s = RSet::from_sorted(s);
                if seen.insert(s.clone()) {
                    discovered.push(s);
                }
            }
        }
        for e in &edges {
            for &u in e {
                if unexplored[u as usize] {
                    unexplored[u as usize] = false;
                    unexplored_count -= 1;
                }
            }
        }
        for &i in &fresh {
            edge_unexplored[i] = false;
        }
        active.extend(discovered.iter().cloned());

        steps.push(ExplorationStep {
            t,
            explored: v,
            active_count: active.len(),
            unexplored_count,
            covered_count: t,
            x: discovered.len(),
            y,
            z: edges.len(),
            unexplored_edges: edges,
            discovered,
            edge_escapes,
            edge_overlap,
        });
    }

    let terminated_at = active.is_empty().then_some(t);
    ExplorationTrace {
        n: h.n(),
        k: h.k(),
        r: r as u32,
        root: root.clone(),
        steps,
        terminated_at,
        truncated: !active.is_empty(),
    }
}

/// First step at which each deviation event occurs, within the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DeviationReport {
    /// `Y_t != Z_t`.
    pub y_neq_z: Option<usize>,
    /// An offspring hyperedge meets more than `r` already reached vertices.
    pub edge_escapes: Option<usize>,
    /// Two offspring hyperedges of one r-set share more than `r` vertices.
    pub edge_overlap: Option<usize>,
    /// `min(t_0, depth)`: number of steps scanned.
    pub within_depth: usize,
}

impl DeviationReport {
    pub fn any(&self) -> bool {
        self.y_neq_z.is_some() || self.edge_escapes.is_some() || self.edge_overlap.is_some()
    }
}

/// Scans steps `1..=min(t_0, depth)` of `trace`.
///
/// The escape and overlap predicates are evaluated during [`explore`], which
/// uses the trace's own `r`; `r` here must match it.
pub fn detect_deviations(trace: &ExplorationTrace, r: u32, depth: usize) -> DeviationReport {
    assert_eq!(trace.r, r, "trace was produced with a different r");
    let within = trace.steps.len().min(depth);
    let mut report = DeviationReport { within_depth: within, ..Default::default() };
    for s in &trace.steps[..within] {
        if s.y != s.z && report.y_neq_z.is_none() {
            report.y_neq_z = Some(s.t);
        }
        if s.edge_escapes && report.edge_escapes.is_none() {
            report.edge_escapes = Some(s.t);
        }
        if s.edge_overlap && report.edge_overlap.is_none() {
            report.edge_overlap = Some(s.t);
        }
    }
    report
}
