//! Seeded Monte Carlo experiments over a parameter grid, with JSON and CSV
//! reports.

mod config;
pub mod ops;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::ModelParams;
use crate::rng::split_seed;

pub use config::{ExperimentConfig, Experiments, Gates, Grid};
pub use ops::{DecayFit, DegreeRecord, DeviationRecord, MomentRow, NeighborhoodRecord, SpectralRecord, TailRecord};

const TAG_NEIGHBORHOOD: u64 = 0;
const TAG_DEGREE: u64 = 1;
const TAG_TAIL: u64 = 2;
const TAG_DEVIATION: u64 = 3;
const TAG_SPECTRAL: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub params: ModelParams,
    pub d: u32,
    pub seed: u64,
    pub neighborhood: Option<NeighborhoodRecord>,
    pub degree: Option<DegreeRecord>,
    pub tail: Option<TailRecord>,
    pub deviation: Option<DeviationRecord>,
    pub spectral: Option<SpectralRecord>,
    /// Sub-experiments that failed as a whole or were not applicable.
    pub notes: Vec<String>,
    pub degraded: bool,
}

/// Deterministic part of an experiment: a pure function of the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub points: Vec<PointRecord>,
    pub decay_fits: Vec<DecayFit>,
    pub skipped: Vec<String>,
    pub violations: Vec<String>,
}

impl ConvergenceReport {
    pub fn has_violations(&self) -> bool {
        !self.violations.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

/// Wall-clock seconds, kept apart from the report so that the report stays
/// reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub point_seconds: Vec<f64>,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub report: ConvergenceReport,
    pub timing: Timing,
}

fn label(p: &ModelParams) -> String {
    format!("n={} k={} r={} lambda={}", p.n, p.k, p.r, p.lambda)
}

/// Runs every enabled sub-experiment on every grid point. `threads` sizes a
/// private worker pool (`None` uses rayon's default); it never changes the
/// report.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let threads_used = pool.current_num_threads();
    let start = Instant::now();
    let (report, point_seconds) = pool.install(|| run_grid(cfg));
    Ok(ExperimentOutcome {
        report,
        timing: Timing { total_seconds: start.elapsed().as_secs_f64(), point_seconds, threads: threads_used },
    })
}

fn record_or_note<T>(name: &str, result: Option<Result<T>>, notes: &mut Vec<String>) -> Option<T> {
    match result? {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{name}: {e}"));
            None
        }
    }
}

fn run_point(cfg: &ExperimentConfig, params: &ModelParams, seed: u64) -> PointRecord {
    let ex = cfg.experiments;
    let mut notes = Vec::new();
    let neighborhood = ex.neighborhood.then(|| {
        ops::neighborhood_tv(
            params,
            cfg.depth,
            cfg.trials,
            cfg.gw_trials,
            cfg.root_cap,
            split_seed(seed, TAG_NEIGHBORHOOD),
        )
    });
    let neighborhood = record_or_note("neighborhood", neighborhood, &mut notes);
    let degree = ex.degree.then(|| ops::degree_poisson_tv(params, cfg.degree_samples, split_seed(seed, TAG_DEGREE)));
    let degree = record_or_note("degree", degree, &mut notes);
    let tail =
        (ex.tail && params.r == 1).then(|| ops::hyperedge_tail(params, cfg.tail_samples, split_seed(seed, TAG_TAIL)));
    let tail = record_or_note("tail", tail, &mut notes);
    let deviation = ex.deviation.then(|| {
        ops::deviation_rate(params, cfg.deviation_depth(), cfg.deviation_trials(), split_seed(seed, TAG_DEVIATION))
    });
    let deviation = record_or_note("deviation", deviation, &mut notes);
    let spectral = ex.spectral.then(|| {
        ops::spectral_compare(
            params,
            cfg.moment_order,
            cfg.trials,
            cfg.gw_trials,
            cfg.dense_cap,
            split_seed(seed, TAG_SPECTRAL),
        )
    });
    let spectral = record_or_note("spectral", spectral, &mut notes);
    let degraded = !notes.is_empty()
        || neighborhood.as_ref().is_some_and(|r| r.degraded)
        || spectral.as_ref().is_some_and(|r| r.degraded);
    PointRecord {
        params: *params,
        d: params.block_size(),
        seed,
        neighborhood,
        degree,
        tail,
        deviation,
        spectral,
        notes,
        degraded,
    }
}

fn run_grid(cfg: &ExperimentConfig) -> (ConvergenceReport, Vec<f64>) {
    let (params, skipped) = cfg.points();
    let mut points = Vec::with_capacity(params.len());
    let mut seconds = Vec::with_capacity(params.len());
    for (i, p) in params.iter().enumerate() {
        let t = Instant::now();
        points.push(run_point(cfg, p, split_seed(cfg.master_seed, i as u64)));
        seconds.push(t.elapsed().as_secs_f64());
    }
    let decay_fits = fit_decay(&points);
    let violations = collect_violations(cfg, &points, &decay_fits);
    let mut config = cfg.clone();
    config.output_dir = None;
    let report = ConvergenceReport { config, points, decay_fits, skipped, violations };
    (report, seconds)
}

/// One fit per `(k, r, lambda)` with at least four distinct `n`.
fn fit_decay(points: &[PointRecord]) -> Vec<DecayFit> {
    let mut groups: BTreeMap<(u32, u32, u64), Vec<(u32, f64)>> = BTreeMap::new();
    for pt in points {
        if let Some(dev) = &pt.deviation {
            let p = &pt.params;
            groups.entry((p.k, p.r, p.lambda.to_bits())).or_default().push((p.n, dev.rate));
        }
    }
    groups
        .into_iter()
        .filter(|(_, pts)| pts.len() >= 4)
        .map(|((k, r, lambda), pts)| ops::deviation_decay(k, r, f64::from_bits(lambda), &pts))
        .collect()
}

fn collect_violations(cfg: &ExperimentConfig, points: &[PointRecord], fits: &[DecayFit]) -> Vec<String> {
    let mut out = Vec::new();
    for pt in points {
        let at = label(&pt.params);
        if let Some(d) = pt.degree.as_ref().filter(|d| d.violation) {
            out.push(format!("{at}: degree TV {} exceeds bound {}", d.exact_tv, d.bound));
        }
        if let Some(t) = pt.tail.as_ref().filter(|t| t.violation) {
            out.push(format!(
                "{at}: tail frequency {} exceeds bound {} + 3 SE ({})",
                t.empirical, t.bound, t.std_error
            ));
        }
        if let Some(s) = pt.spectral.as_ref().filter(|s| !s.check_passed) {
            out.push(format!("{at}: eigenvalue moments differ from traces by {}", s.max_check_error));
        }
        if let (Some(nb), Some(max)) = (&pt.neighborhood, cfg.gates.max_neighborhood_tv) {
            if nb.tv > max {
                out.push(format!("{at}: neighbourhood TV {} exceeds gate {max}", nb.tv));
            }
        }
    }
    for fit in fits {
        let at = format!("decay k={} r={} lambda={}", fit.k, fit.r, fit.lambda);
        if let Some(min) = cfg.gates.min_decay_r2 {
            if fit.r_squared < min {
                out.push(format!("{at}: R^2 {} below gate {min}", fit.r_squared));
            }
        }
        if cfg.gates.require_decay_decreasing && !fit.strictly_decreasing {
            out.push(format!("{at}: rates {:?} are not strictly decreasing", fit.rates));
        }
    }
    out
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn point_cols(p: &PointRecord) -> Vec<String> {
    let m = &p.params;
    vec![m.n.to_string(), m.k.to_string(), m.r.to_string(), m.lambda.to_string(), m.p.to_string()]
}

const POINT_HEADER: [&str; 5] = ["n", "k", "r", "lambda", "p"];

fn header(extra: &[&'static str]) -> Vec<&'static str> {
    POINT_HEADER.iter().copied().chain(extra.iter().copied()).collect()
}

/// Writes `report.json`, `timing.json` and one CSV per sub-experiment into
/// `dir`.
pub fn write_outputs(outcome: &ExperimentOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let report = &outcome.report;
    write_atomic(&dir.join("report.json"), report.to_json()?.as_bytes())?;
    write_atomic(&dir.join("timing.json"), serde_json::to_string_pretty(&outcome.timing)?.as_bytes())?;

    let mut rows = Vec::new();
    for p in &report.points {
        if let Some(r) = &p.neighborhood {
            let mut row = point_cols(p);
            row.extend([
                r.depth.to_string(),
                r.tv.to_string(),
                r.classes_hypergraph.to_string(),
                r.classes_gw.to_string(),
            ]);
            rows.push(row);
        }
    }
    let h = header(&["depth", "tv", "classes_hypergraph", "classes_gw"]);
    write_atomic(&dir.join("neighborhood.csv"), &csv_bytes(&h, rows)?)?;

    let mut rows = Vec::new();
    for p in &report.points {
        if let Some(r) = &p.degree {
            let mut row = point_cols(p);
            row.extend([
                r.exact_tv.to_string(),
                r.bound.to_string(),
                r.sampled_tv.to_string(),
                r.violation.to_string(),
            ]);
            rows.push(row);
        }
    }
    let h = header(&["exact_tv", "bound", "sampled_tv", "violation"]);
    write_atomic(&dir.join("degree.csv"), &csv_bytes(&h, rows)?)?;

    let mut rows = Vec::new();
    for p in &report.points {
        if let Some(r) = &p.tail {
            let mut row = point_cols(p);
            row.extend([
                r.empirical.to_string(),
                r.std_error.to_string(),
                r.bound.to_string(),
                r.exact.to_string(),
                r.violation.to_string(),
            ]);
            rows.push(row);
        }
    }
    let h = header(&["empirical", "std_error", "bound", "exact", "violation"]);
    write_atomic(&dir.join("tail.csv"), &csv_bytes(&h, rows)?)?;

    let mut rows = Vec::new();
    for p in &report.points {
        if let Some(r) = &p.deviation {
            let mut row = point_cols(p);
            row.extend([r.depth.to_string(), r.rate.to_string(), r.std_error.to_string()]);
            rows.push(row);
        }
    }
    let h = header(&["depth", "rate", "std_error"]);
    write_atomic(&dir.join("deviation.csv"), &csv_bytes(&h, rows)?)?;

    let rows = report
        .decay_fits
        .iter()
        .map(|f| {
            vec![
                f.k.to_string(),
                f.r.to_string(),
                f.lambda.to_string(),
                f.coefficient.to_string(),
                f.r_squared.to_string(),
                f.strictly_decreasing.to_string(),
            ]
        })
        .collect();
    let h = ["k", "r", "lambda", "coefficient", "r_squared", "strictly_decreasing"];
    write_atomic(&dir.join("decay_fit.csv"), &csv_bytes(&h, rows)?)?;

    let mut rows = Vec::new();
    for p in &report.points {
        if let Some(s) = &p.spectral {
            for m in &s.rows {
                let mut row = point_cols(p);
                row.extend([
                    m.k.to_string(),
                    m.esd_mean.to_string(),
                    m.esd_std_error.to_string(),
                    m.gw_mean.to_string(),
                    m.gw_std_error.to_string(),
                    m.within_3se.to_string(),
                ]);
                rows.push(row);
            }
        }
    }
    let h = header(&["moment", "esd_mean", "esd_std_error", "gw_mean", "gw_std_error", "within_3se"]);
    write_atomic(&dir.join("spectral.csv"), &csv_bytes(&h, rows)?)?;
    Ok(())
}
