use proptest::prelude::*;
use rand::seq::SliceRandom;

use hyperlocal::graph::{GraphBuilder, RootedWeightedGraph, WeightedGraph};
use hyperlocal::rng::rng_from_seed;
use hyperlocal::topology::{
    are_isomorphic, ball, canonicalize, empirical_measure, local_distance, mass_transport_sums,
    NeighborhoodDistribution,
};

/// `(vertex_count, edges)` with weights in 1..=3.
fn arb_graph(max_n: u32) -> impl Strategy<Value = (u32, Vec<(u32, u32, u32)>)> {
    (1..=max_n).prop_flat_map(|n| {
        let edge = (0..n, 0..n, 1u32..=3);
        (Just(n), prop::collection::vec(edge, 0..(2 * n as usize + 2)))
    })
}

fn build(n: u32, edges: &[(u32, u32, u32)], relabel: &[u32]) -> WeightedGraph<u32> {
    let mut b = GraphBuilder::new();
    for v in 0..n {
        b.add_vertex(relabel[v as usize]);
    }
    let mut seen = std::collections::BTreeSet::new();
    for &(u, v, w) in edges {
        let key = (u.min(v), u.max(v));
        if u != v && seen.insert(key) {
            b.add_weight(relabel[u as usize], relabel[v as usize], w);
        }
    }
    b.build(n as u64)
}

fn rooted(n: u32, edges: &[(u32, u32, u32)], root: u32) -> RootedWeightedGraph<u32> {
    let identity: Vec<u32> = (0..n).collect();
    RootedWeightedGraph::new(build(n, edges, &identity), &(root % n)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn code_is_invariant_under_relabeling((n, edges) in arb_graph(12), root in 0u32..12, seed in any::<u64>()) {
        let root = root % n;
        let mut perm: Vec<u32> = (0..n).map(|v| v + 100).collect();
        perm.shuffle(&mut rng_from_seed(seed));
        let identity: Vec<u32> = (0..n).collect();
        let a = RootedWeightedGraph::new(build(n, &edges, &identity), &root).unwrap();
        let b = RootedWeightedGraph::new(build(n, &edges, &perm), &perm[root as usize]).unwrap();
        prop_assert_eq!(canonicalize(&a).unwrap(), canonicalize(&b).unwrap());
        prop_assert!(are_isomorphic(&a, &b));
    }

    #[test]
    fn balls_nest((n, edges) in arb_graph(12), root in 0u32..12, s in 0usize..4, t in 0usize..4) {
        let g = rooted(n, &edges, root);
        let inner = ball(&ball(&g, t), s);
        let direct = ball(&g, s.min(t));
        prop_assert_eq!(canonicalize(&inner).unwrap(), canonicalize(&direct).unwrap());
        prop_assert_eq!(canonicalize(&ball(&g, t)).unwrap(), canonicalize(&ball(&g, t)).unwrap());
    }

    #[test]
    fn isomorphism_is_an_equivalence(
        (n1, e1) in arb_graph(5), (n2, e2) in arb_graph(5), (n3, e3) in arb_graph(5),
        r1 in 0u32..5, r2 in 0u32..5, r3 in 0u32..5,
    ) {
        let gs = [rooted(n1, &e1, r1), rooted(n2, &e2, r2), rooted(n3, &e3, r3)];
        for g in &gs {
            prop_assert!(are_isomorphic(g, g));
        }
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(are_isomorphic(&gs[i], &gs[j]), are_isomorphic(&gs[j], &gs[i]));
                for k in 0..3 {
                    if are_isomorphic(&gs[i], &gs[j]) && are_isomorphic(&gs[j], &gs[k]) {
                        prop_assert!(are_isomorphic(&gs[i], &gs[k]));
                    }
                }
            }
        }
    }

    #[test]
    fn local_distance_is_ultrametric(
        (n1, e1) in arb_graph(8), (n2, e2) in arb_graph(8), (n3, e3) in arb_graph(8),
        r1 in 0u32..8, r2 in 0u32..8, r3 in 0u32..8,
    ) {
        let (a, b, c) = (rooted(n1, &e1, r1), rooted(n2, &e2, r2), rooted(n3, &e3, r3));
        let m = |x: &RootedWeightedGraph<u32>, y: &RootedWeightedGraph<u32>| local_distance(x, y).unwrap().value();
        prop_assert!(m(&a, &c) <= m(&a, &b).max(m(&b, &c)));
        prop_assert_eq!(m(&a, &b), m(&b, &a));
        prop_assert_eq!(m(&a, &a), 0.0);
    }

    #[test]
    fn measure_counts_every_vertex((n, edges) in arb_graph(15), extra in 0u64..20, depth in 0usize..3) {
        let identity: Vec<u32> = (0..n).collect();
        let base = build(n, &edges, &identity);
        let mut b = GraphBuilder::new();
        for v in base.labels() {
            b.add_vertex(*v);
        }
        for (u, v, w) in base.edges() {
            b.add_weight(*base.label(u), *base.label(v), w);
        }
        let g: WeightedGraph<u32> = b.build(n as u64 + extra);
        let dist = empirical_measure(&g, depth).unwrap();
        prop_assert_eq!(dist.total, n as u64 + extra);
        prop_assert_eq!(dist.counts.values().sum::<u64>(), dist.total);
    }

    #[test]
    fn merge_order_does_not_matter((n, edges) in arb_graph(10), seed in any::<u64>()) {
        let identity: Vec<u32> = (0..n).collect();
        let g = build(n, &edges, &identity);
        let parts: Vec<NeighborhoodDistribution> = (0..4).map(|d| {
            let mut m = empirical_measure(&g, 1).unwrap();
            m.depth = 1;
            if d % 2 == 1 { m.counts.values_mut().for_each(|c| *c *= 2); m.total *= 2; }
            m
        }).collect();
        let mut forward = NeighborhoodDistribution::new(1);
        for p in parts.iter().cloned() {
            forward.merge(p);
        }
        let mut shuffled = parts.clone();
        shuffled.shuffle(&mut rng_from_seed(seed));
        let mut other = NeighborhoodDistribution::new(1);
        for p in shuffled {
            other.merge(p);
        }
        prop_assert_eq!(forward, other);
    }

    #[test]
    fn mass_transport_balances((n, edges) in arb_graph(20)) {
        let identity: Vec<u32> = (0..n).collect();
        let g = build(n, &edges, &identity);
        let f = |g: &WeightedGraph<u64>, u: usize, v: usize| (g.weight(u, v) * (1 + g.neighbors(v).len() as u32)) as f64;
        let sums = mass_transport_sums(&g, &f).unwrap();
        prop_assert!(sums.holds(1e-12));
    }
}

#[test]
fn distance_examples() {
    // Paths rooted at an end: agree up to radius 2, differ at 3.
    let path4 = rooted(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)], 0);
    let path3_star = rooted(5, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (2, 4, 1)], 0);
    let d = local_distance(&path4, &path3_star).unwrap();
    assert_eq!(d.as_ratio(), (1, 3));
    let single = rooted(1, &[], 0);
    assert_eq!(local_distance(&single, &single).unwrap().value(), 0.0);
    let edge = rooted(2, &[(0, 1, 1)], 0);
    assert_eq!(local_distance(&single, &edge).unwrap().as_ratio(), (1, 1));
}
