use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use hyperlocal::combinatorics::{binomial, rank_combination, subsets, unrank_combination};
use hyperlocal::hypergraph::rset_degrees;
use hyperlocal::{build_r_line_graph, sample_hypergraph, Hypergraph, ModelParams, RSet};

fn shape() -> impl Strategy<Value = (u32, u32, u32)> {
    (2u32..=5).prop_flat_map(|k| (Just(k), 1..k, k..=12)).prop_map(|(k, r, n)| (n, k, r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sampled_edges_are_valid_and_seeded((n, k, r) in shape(), p in 0.0f64..0.5, seed in any::<u64>()) {
        let params = ModelParams::with_probability(n, k, r, p).unwrap();
        let h = sample_hypergraph(&params, seed).unwrap();
        prop_assert_eq!(&h, &sample_hypergraph(&params, seed).unwrap());
        let mut seen = BTreeSet::new();
        for e in h.edges() {
            prop_assert_eq!(e.len(), k as usize);
            prop_assert!(e.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(e[0] >= 1 && e[k as usize - 1] <= n);
            prop_assert!(seen.insert(e.clone()));
        }
    }

    #[test]
    fn degree_and_weight_sums((n, k, r) in shape(), p in 0.0f64..0.5, seed in any::<u64>()) {
        let params = ModelParams::with_probability(n, k, r, p).unwrap();
        let h = sample_hypergraph(&params, seed).unwrap();
        let ckr = binomial(k as u64, r as u64).unwrap() as u64;
        let degree_sum: usize = rset_degrees(&h, r).values().sum();
        prop_assert_eq!(degree_sum as u64, h.edge_count() as u64 * ckr);
        let g = build_r_line_graph(&h, r).unwrap();
        prop_assert_eq!(g.vertex_count() as u128, binomial(n as u64, r as u64).unwrap());
        prop_assert_eq!(g.total_weight(), h.edge_count() as u64 * ckr * (ckr - 1) / 2);
    }

    #[test]
    fn weights_count_covering_edges((n, k, r) in shape(), p in 0.05f64..0.5, seed in any::<u64>()) {
        let params = ModelParams::with_probability(n, k, r, p).unwrap();
        let h = sample_hypergraph(&params, seed).unwrap();
        let g = build_r_line_graph(&h, r).unwrap();
        let mut oracle: BTreeMap<(Vec<u32>, Vec<u32>), u32> = BTreeMap::new();
        for e in h.edges() {
            let subs = subsets(e, r as usize);
            for (i, a) in subs.iter().enumerate() {
                for b in &subs[i + 1..] {
                    *oracle.entry((a.clone(), b.clone())).or_insert(0) += 1;
                }
            }
        }
        let got: BTreeMap<(Vec<u32>, Vec<u32>), u32> = g
            .edges()
            .map(|(i, j, w)| ((g.label(i).members().to_vec(), g.label(j).members().to_vec()), w))
            .collect();
        prop_assert_eq!(got, oracle);
    }

    #[test]
    fn top_r_line_graph_matches_union_rule((n, k, _r) in shape(), p in 0.05f64..0.5, seed in any::<u64>()) {
        let r = k - 1;
        let params = ModelParams::with_probability(n, k, r, p).unwrap();
        let h = sample_hypergraph(&params, seed).unwrap();
        let edges: BTreeSet<Vec<u32>> = h.edges().iter().cloned().collect();
        let g = build_r_line_graph(&h, r).unwrap();
        let got: BTreeSet<(Vec<u32>, Vec<u32>)> = g
            .edges()
            .map(|(i, j, _)| (g.label(i).members().to_vec(), g.label(j).members().to_vec()))
            .collect();
        let all: Vec<u32> = (1..=n).collect();
        let sigmas = subsets(&all, r as usize);
        let mut expected = BTreeSet::new();
        for (i, a) in sigmas.iter().enumerate() {
            for b in &sigmas[i + 1..] {
                let union: BTreeSet<u32> = a.iter().chain(b).copied().collect();
                if union.len() == k as usize && edges.contains(&union.into_iter().collect::<Vec<_>>()) {
                    expected.insert((a.clone(), b.clone()));
                }
            }
        }
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn rank_unrank_round_trip(n in 1u32..40, k_frac in 0.0f64..1.0, rank_frac in 0.0f64..1.0) {
        let k = ((n as f64) * k_frac).round() as u32;
        let total = binomial(n as u64, k as u64).unwrap();
        let rank = ((total as f64 - 1.0) * rank_frac) as u128;
        let subset = unrank_combination(n, k, rank);
        prop_assert_eq!(subset.len(), k as usize);
        prop_assert_eq!(rank_combination(n, &subset), rank);
    }
}

#[test]
fn both_samplers_match_the_mean_edge_count() {
    for p in [0.004, 0.05] {
        let params = ModelParams::with_probability(30, 3, 1, p).unwrap();
        let counts: Vec<f64> = (0..400).map(|s| sample_hypergraph(&params, s).unwrap().edge_count() as f64).collect();
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let expected = 4060.0 * p;
        let se = (4060.0 * p * (1.0 - p) / counts.len() as f64).sqrt();
        assert!((mean - expected).abs() < 5.0 * se, "p={p}: mean {mean} vs {expected}");
    }
}

#[test]
fn json_round_trip_and_validation() {
    let h = Hypergraph::new(6, 3, vec![vec![3, 1, 2], vec![2, 5, 6]]).unwrap();
    let back = Hypergraph::from_json(&h.to_json().unwrap()).unwrap();
    assert_eq!(h, back);
    assert!(Hypergraph::new(6, 3, vec![vec![1, 2, 7]]).is_err());
    assert!(Hypergraph::new(6, 3, vec![vec![1, 1, 2]]).is_err());
    assert!(RSet::new(vec![]).is_err());
}

#[test]
fn resolved_probability_examples() {
    let p = ModelParams::resolve(10, 3, 1, 2.0).unwrap();
    assert!((p.p - 2.0 / 36.0).abs() < 1e-15);
    assert!(ModelParams::resolve(5, 7, 1, 1.0).unwrap_err().to_string().contains("k exceeds n"));
    assert_eq!(ModelParams::resolve(8, 3, 2, 1.0).unwrap().block_size(), 2);
}
