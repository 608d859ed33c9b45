use hyperlocal::harness::ops::{degree_poisson_tv, deviation_decay, deviation_rate, hyperedge_tail, neighborhood_tv};
use hyperlocal::harness::{run_experiment, write_outputs, ExperimentConfig};
use hyperlocal::ModelParams;

fn small_config(lambda: f64) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{
            "grid": {{"n": [12, 16], "k": [3], "r": [1, 2], "lambda": [{lambda}]}},
            "depth": 2, "trials": 3, "gw_trials": 300, "moment_order": 4,
            "master_seed": 77, "degree_samples": 500, "tail_samples": 100,
            "deviation_trials": 50, "dense_cap": 200
        }}"#
    ))
    .unwrap()
}

#[test]
fn degree_with_n_equal_k_is_bernoulli() {
    // One candidate hyperedge per r-set: Bernoulli(p) against Poisson(p).
    let params = ModelParams::with_probability(5, 5, 2, 0.3).unwrap();
    let rec = degree_poisson_tv(&params, 1000, 3).unwrap();
    let p: f64 = 0.3;
    let oracle = p * (1.0 - (-p).exp());
    assert_eq!(rec.degree_trials, 1);
    assert!((rec.exact_tv - oracle).abs() < 1e-12, "{} vs {oracle}", rec.exact_tv);
    assert!(!rec.violation);
}

#[test]
fn tail_frequency_tracks_exact_probability() {
    let params = ModelParams::resolve(60, 3, 1, 2.0).unwrap();
    let rec = hyperedge_tail(&params, 20_000, 11).unwrap();
    assert!(rec.exact > 0.0 && rec.exact < 0.01);
    assert!((rec.empirical - rec.exact).abs() <= 3.0 * rec.std_error.max(1.0 / 20_000.0), "{rec:?}");
    let r2 = ModelParams::resolve(60, 3, 2, 1.0).unwrap();
    assert!(hyperedge_tail(&r2, 10, 0).is_err());
}

#[test]
fn empty_model_has_trivial_records() {
    let params = ModelParams::resolve(20, 3, 1, 0.0).unwrap();
    let dev = deviation_rate(&params, 3, 40, 5).unwrap();
    assert_eq!(dev.rate, 0.0);
    let nb = neighborhood_tv(&params, 2, 2, 200, 1000, 9).unwrap();
    assert_eq!(nb.tv, 0.0);
    let deg = degree_poisson_tv(&params, 100, 1).unwrap();
    assert_eq!(deg.exact_tv, 0.0);
    assert_eq!(deg.sampled_tv, 0.0);
}

#[test]
fn tv_values_stay_in_unit_interval() {
    for (n, r) in [(10, 1), (14, 2)] {
        let params = ModelParams::resolve(n, 4, r, 1.3).unwrap();
        let nb = neighborhood_tv(&params, 2, 3, 500, 1000, n as u64).unwrap();
        assert!((0.0..=1.0).contains(&nb.tv));
        let deg = degree_poisson_tv(&params, 2000, 4).unwrap();
        assert!((0.0..=1.0).contains(&deg.exact_tv) && (0.0..=1.0).contains(&deg.sampled_tv));
    }
}

#[test]
fn decay_fit_recovers_inverse_size() {
    let points: Vec<(u32, f64)> = [50u32, 100, 200, 400].iter().map(|&n| (n, 7.0 / (n - 1) as f64)).collect();
    let fit = deviation_decay(3, 1, 1.0, &points);
    assert!((fit.coefficient - 7.0).abs() < 1e-9);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    assert!(fit.strictly_decreasing);
}

#[test]
fn report_is_independent_of_thread_count() {
    let cfg = small_config(1.0);
    let one = run_experiment(&cfg, Some(1)).unwrap();
    let four = run_experiment(&cfg, Some(4)).unwrap();
    assert_eq!(one.report.to_json().unwrap(), four.report.to_json().unwrap());
    assert_eq!(one.report.points.len(), 4);

    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_outputs(&one, a.path()).unwrap();
    write_outputs(&four, b.path()).unwrap();
    for name in ["report.json", "neighborhood.csv", "degree.csv", "deviation.csv", "spectral.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn zero_rate_grid_has_no_violations() {
    let out = run_experiment(&small_config(0.0), None).unwrap();
    assert!(!out.report.has_violations(), "{:?}", out.report.violations);
    for p in &out.report.points {
        assert_eq!(p.deviation.as_ref().unwrap().rate, 0.0);
    }
}

#[test]
fn config_rejects_unknown_fields_and_bad_values() {
    assert!(ExperimentConfig::from_json(r#"{"grid": {"n": [5], "k": [3], "r": [1], "lambda": [1]}, "depth": 1, "trials": 1, "gw_trials": 1, "master_seed": 0, "bogus": 1}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"grid": {"n": [5], "k": [3], "r": [1], "lambda": [-1]}, "depth": 1, "trials": 1, "gw_trials": 1, "master_seed": 0}"#).is_err());
    let cfg = ExperimentConfig::from_json(r#"{"grid": {"n": [5, 2], "k": [3], "r": [1, 3], "lambda": [1]}, "depth": 1, "trials": 1, "gw_trials": 1, "master_seed": 0}"#).unwrap();
    let (points, skipped) = cfg.points();
    assert_eq!(points.len(), 1);
    assert_eq!(skipped.len(), 3);
}

/// Max over ten pilot seeds (0.0475) with 10% headroom.
const REFERENCE_TV_GATE: f64 = 0.052;

#[test]
fn reference_point_neighborhood_tv() {
    let params = ModelParams::resolve(200, 3, 1, 1.0).unwrap();
    let rec = neighborhood_tv(&params, 1, 50, 10_000, 100_000, 2026).unwrap();
    assert!(rec.tv < REFERENCE_TV_GATE, "{rec:?}");
}

#[test]
fn graph_case_tv_shrinks_with_n() {
    let tv = |n: u32| {
        let params = ModelParams::resolve(n, 2, 1, 1.0).unwrap();
        neighborhood_tv(&params, 2, (20_000 / n) as usize, 20_000, 100_000, 41).unwrap().tv
    };
    let (small, large) = (tv(100), tv(400));
    assert!(large < small, "{large} vs {small}");
}

#[test]
fn master_seeds_agree_within_sampling_noise() {
    let tv_for = |seed: u64| {
        let mut cfg = ExperimentConfig::from_json(
            r#"{"grid": {"n": [200], "k": [3], "r": [1], "lambda": [1.0]}, "depth": 1, "trials": 50,
                "gw_trials": 10000, "master_seed": 0,
                "experiments": {"degree": false, "tail": false, "deviation": false, "spectral": false}}"#,
        )
        .unwrap();
        cfg.master_seed = seed;
        let out = run_experiment(&cfg, None).unwrap();
        out.report.points[0].neighborhood.as_ref().unwrap().tv
    };
    let replicates: Vec<f64> = (100..108).map(tv_for).collect();
    let mean = replicates.iter().sum::<f64>() / replicates.len() as f64;
    let sd = (replicates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (replicates.len() - 1) as f64).sqrt();
    let (a, b) = (tv_for(1), tv_for(2));
    assert!((a - b).abs() <= 3.0 * std::f64::consts::SQRT_2 * sd, "{a} vs {b}, sd {sd}");
}

#[test]
fn zero_probability_has_empty_tail() {
    let params = ModelParams::with_probability(30, 3, 1, 0.0).unwrap();
    let rec = hyperedge_tail(&params, 1000, 8).unwrap();
    assert_eq!(rec.empirical, 0.0);
    assert!(!rec.violation);
}
