//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid flags or parameters,
//! 3 bound violation reported by `converge`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exploration::{default_max_steps, detect_deviations, explore};
use crate::gw::{gw_to_hypertree, sample_gw, GwParams};
use crate::harness::{run_experiment, write_atomic, write_outputs, ExperimentConfig};
use crate::hypergraph::{build_r_line_graph, sample_hypergraph, Hypergraph, ModelParams, RSet};
use crate::spectra::{adjacency_matrix_capped, eigenvalues, esd, esd_moments, graph_moments, DEFAULT_DENSE_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hyperlocal",
    version,
    about = "Sparse random hypergraphs, their r-set line graphs and Galton-Watson limits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample H(n, k, p) and write it as JSON.
    Sample(SampleArgs),
    /// Build the r-set weighted line graph of a hypergraph JSON file.
    Linegraph(LinegraphArgs),
    /// Run the breadth-first exploration on a hypergraph JSON file.
    Explore(ExploreArgs),
    /// Sample a d-block Galton-Watson tree with d = C(k, r) - 1.
    Gw(GwArgs),
    /// Eigenvalues, ESD and moments of the r-set adjacency matrix.
    Spectrum(SpectrumArgs),
    /// Run a convergence experiment from a JSON config.
    Converge(ConvergeArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Number of vertices.
    #[arg(long)]
    n: u32,
    /// Hyperedge size.
    #[arg(long)]
    k: u32,
    /// Root size; required with --lambda, defaults to 1 with --p.
    #[arg(long)]
    r: Option<u32>,
    /// Hyperedge probability.
    #[arg(long, conflicts_with = "lambda", required_unless_present = "lambda")]
    p: Option<f64>,
    /// Expected r-set degree; sets p = lambda / C(n - r, k - r).
    #[arg(long, requires = "r")]
    lambda: Option<f64>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<ModelParams> {
        match (self.p, self.lambda) {
            (Some(p), _) => ModelParams::with_probability(self.n, self.k, self.r.unwrap_or(1), p),
            (None, Some(lambda)) => ModelParams::resolve(self.n, self.k, self.r.unwrap_or(1), lambda),
            (None, None) => Err(Error::InvalidConfig("one of --p or --lambda is required".into())),
        }
    }
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Random seed.
    #[arg(long)]
    seed: u64,
    /// Output JSON path.
    #[arg(long, default_value = "hypergraph.json")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct LinegraphArgs {
    /// Hypergraph JSON produced by `sample`.
    #[arg(long)]
    input: PathBuf,
    /// Size of the r-sets.
    #[arg(long)]
    r: u32,
    /// Output JSON path.
    #[arg(long, default_value = "linegraph.json")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExploreArgs {
    /// Hypergraph JSON produced by `sample`.
    #[arg(long)]
    input: PathBuf,
    /// Size of the root r-set.
    #[arg(long)]
    r: u32,
    /// Root r-set as comma-separated vertices; defaults to 1..=r.
    #[arg(long)]
    root: Option<String>,
    /// Steps scanned for deviation events; the exploration itself runs to
    /// completion.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Output CSV path for the per-step trace.
    #[arg(long, default_value = "exploration.csv")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GwArgs {
    /// Hyperedge size of the matching hypergraph model.
    #[arg(long)]
    k: u32,
    /// Root size; the block size is C(k, r) - 1.
    #[arg(long)]
    r: u32,
    /// Mean number of blocks per vertex.
    #[arg(long)]
    lambda: f64,
    /// Number of generations.
    #[arg(long)]
    depth: u32,
    /// Random seed.
    #[arg(long)]
    seed: u64,
    /// Output JSON path for the tree.
    #[arg(long, default_value = "gw.json")]
    out: PathBuf,
    /// Also write the realized hypertree as hypergraph JSON.
    #[arg(long)]
    hypertree: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Random seed.
    #[arg(long)]
    seed: u64,
    /// Highest moment reported.
    #[arg(long, default_value_t = 8)]
    moment_order: usize,
    /// Histogram bins.
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Largest non-isolated block handed to the dense eigensolver.
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    dense_cap: usize,
    /// Output directory.
    #[arg(long, default_value = "spectrum")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; never changes the report.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `trials`.
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides `gw_trials`.
    #[arg(long)]
    gw_trials: Option<usize>,
    /// Overrides `moment_order`.
    #[arg(long)]
    moment_order: Option<usize>,
    /// Overrides `depth`.
    #[arg(long)]
    depth: Option<usize>,
}

/// Errors that stem from bad input rather than a failed run.
fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::KExceedsN { .. }
            | Error::InvalidUniformity(_)
            | Error::InvalidRootSize { .. }
            | Error::InvalidLambda(_)
            | Error::LambdaTooLarge { .. }
            | Error::InvalidProbability(_)
            | Error::InvalidRSet(_)
            | Error::InvalidGwParams(_)
            | Error::InvalidConfig(_)
            | Error::Json(_)
    )
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Sample(a) => cmd_sample(&a),
        Command::Linegraph(a) => cmd_linegraph(&a),
        Command::Explore(a) => cmd_explore(&a),
        Command::Gw(a) => cmd_gw(&a),
        Command::Spectrum(a) => cmd_spectrum(&a),
        Command::Converge(a) => cmd_converge(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_atomic(path, text.as_bytes())
}

fn read_hypergraph(path: &Path) -> Result<Hypergraph> {
    Hypergraph::from_json(&std::fs::read_to_string(path)?)
}

fn cmd_sample(a: &SampleArgs) -> Result<i32> {
    let params = a.model.resolve()?;
    let h = sample_hypergraph(&params, a.seed)?;
    write_text(&a.out, &h.to_json()?)?;
    println!("edges: {}", h.edge_count());
    if a.model.lambda.is_some() {
        println!(
            "p: {} (lambda {} / C({}, {}) = {})",
            params.p,
            params.lambda,
            params.n - params.r,
            params.k - params.r,
            params.degree_trials()
        );
    } else {
        println!("p: {}", params.p);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct LinegraphJson<'a> {
    r: u32,
    vertex_count: u64,
    vertices: &'a [RSet],
    edges: Vec<(usize, usize, u32)>,
}

fn cmd_linegraph(a: &LinegraphArgs) -> Result<i32> {
    let h = read_hypergraph(&a.input)?;
    let g = build_r_line_graph(&h, a.r)?;
    let json =
        LinegraphJson { r: a.r, vertex_count: g.vertex_count(), vertices: g.labels(), edges: g.edges().collect() };
    write_text(&a.out, &serde_json::to_string(&json)?)?;
    println!(
        "r-sets: {} ({} non-isolated), edges: {}, total weight: {}",
        g.vertex_count(),
        g.stored_count(),
        g.edge_count(),
        g.total_weight()
    );
    Ok(EXIT_OK)
}

fn cmd_explore(a: &ExploreArgs) -> Result<i32> {
    let h = read_hypergraph(&a.input)?;
    let root = match &a.root {
        Some(text) => {
            let members = text
                .split(',')
                .map(|s| s.trim().parse::<u32>().map_err(|_| Error::InvalidConfig(format!("bad root member {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            RSet::new(members)?
        }
        None => RSet::initial(a.r),
    };
    if root.len() != a.r as usize || root.members().iter().any(|&v| v > h.n()) {
        return Err(Error::InvalidRSet(root.members().to_vec()));
    }
    let trace = explore(&h, &root, default_max_steps(h.n(), a.r));
    let mut bytes = Vec::new();
    trace.write_csv(&mut bytes)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_atomic(&a.out, &bytes)?;
    let dev = detect_deviations(&trace, a.r, a.depth);
    let show = |x: Option<usize>| x.map_or("none".to_string(), |t| t.to_string());
    println!("steps: {}", trace.steps.len());
    println!("t0: {}", show(trace.terminated_at));
    println!(
        "first deviation within {} steps: y_neq_z={} escape={} overlap={}",
        dev.within_depth,
        show(dev.y_neq_z),
        show(dev.edge_escapes),
        show(dev.edge_overlap)
    );
    Ok(EXIT_OK)
}

fn cmd_gw(a: &GwArgs) -> Result<i32> {
    if a.r == 0 || a.r >= a.k {
        return Err(Error::InvalidRootSize { r: a.r, k: a.k });
    }
    let d = (crate::combinatorics::binomial(a.k as u64, a.r as u64)? - 1) as u32;
    let tree = sample_gw(&GwParams::new(d, a.lambda, a.depth)?, a.seed)?;
    write_text(&a.out, &tree.to_json()?)?;
    if let Some(path) = &a.hypertree {
        let realized = gw_to_hypertree(&tree, a.k, a.r)?;
        write_text(path, &realized.hypergraph.to_json()?)?;
    }
    println!("d: {d}");
    println!("vertices: {}", tree.vertex_count());
    println!("generation sizes: {:?}", tree.generation_sizes());
    Ok(EXIT_OK)
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<i32> {
    let params = a.model.resolve()?;
    if a.moment_order == 0 {
        return Err(Error::InvalidConfig("--moment-order must be at least 1".into()));
    }
    let h = sample_hypergraph(&params, a.seed)?;
    let g = build_r_line_graph(&h, params.r)?;
    let dim =
        u64::try_from(params.rset_count()?).map_err(|_| Error::DenseCap { dim: u64::MAX, cap: a.dense_cap as u64 })?;
    std::fs::create_dir_all(&a.out)?;
    let traces = graph_moments(&g, dim, a.moment_order);
    match adjacency_matrix_capped(&g, dim, a.dense_cap) {
        Ok(m) => {
            let provenance = crate::spectra::Provenance {
                n: params.n,
                k: params.k,
                r: params.r,
                lambda: params.lambda,
                seed: a.seed,
            };
            let sample = eigenvalues(&m)?.with_provenance(provenance);
            let mut bytes = Vec::new();
            sample.write_csv(&mut bytes)?;
            write_atomic(&a.out.join("eigenvalues.csv"), &bytes)?;
            let hist = sample.histogram(a.bins);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["bin_left", "bin_right", "count"])?;
            for (i, c) in hist.counts.iter().enumerate() {
                w.write_record([hist.edges[i].to_string(), hist.edges[i + 1].to_string(), c.to_string()])?;
            }
            write_atomic(&a.out.join("histogram.csv"), &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["x", "F"])?;
            for (x, f) in esd(&sample, &hist.edges) {
                w.write_record([x.to_string(), f.to_string()])?;
            }
            write_atomic(&a.out.join("esd.csv"), &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
            let moments = esd_moments(&sample, a.moment_order);
            write_atomic(
                &a.out.join("moments.json"),
                serde_json::to_string_pretty(&moments.to_json_map())?.as_bytes(),
            )?;
            println!("eigenvalues: {} (mass at zero {:.6})", sample.len(), sample.mass_at_zero(1e-8));
        }
        Err(Error::DenseCap { dim: active, cap }) => {
            println!("{active} non-isolated r-sets exceed the dense cap {cap}; writing moments only");
        }
        Err(e) => return Err(e),
    }
    write_atomic(&a.out.join("trace_moments.json"), serde_json::to_string_pretty(&traces.to_json_map())?.as_bytes())?;
    for (i, m) in traces.moments.iter().enumerate() {
        println!("m{}: {m}", i + 1);
    }
    Ok(EXIT_OK)
}

fn cmd_converge(a: &ConvergeArgs) -> Result<i32> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.master_seed = seed;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(t) = a.gw_trials {
        cfg.gw_trials = t;
    }
    if let Some(k) = a.moment_order {
        cfg.moment_order = k;
    }
    if let Some(d) = a.depth {
        cfg.depth = d;
    }
    if a.threads == Some(0) {
        return Err(Error::InvalidConfig("--threads must be at least 1".into()));
    }
    let out_dir = a.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("converge-out"));
    let outcome = run_experiment(&cfg, a.threads)?;
    write_outputs(&outcome, &out_dir)?;
    let report = &outcome.report;
    for pt in &report.points {
        let p = &pt.params;
        let tv = pt.neighborhood.as_ref().map_or("-".to_string(), |r| format!("{:.4}", r.tv));
        let dev = pt.deviation.as_ref().map_or("-".to_string(), |r| format!("{:.4}", r.rate));
        println!("n={} k={} r={} lambda={}: neighbourhood TV {tv}, deviation rate {dev}", p.n, p.k, p.r, p.lambda);
    }
    for v in &report.violations {
        eprintln!("violation: {v}");
    }
    println!("report: {}", out_dir.join("report.json").display());
    Ok(if report.has_violations() { EXIT_VIOLATION } else { EXIT_OK })
}
