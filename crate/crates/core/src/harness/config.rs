use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::ModelParams;

/// Cartesian grid of model parameters. Combinations that violate
/// `1 <= r < k <= n` are skipped and listed in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n: Vec<u32>,
    pub k: Vec<u32>,
    pub r: Vec<u32>,
    pub lambda: Vec<f64>,
}

/// Which sub-experiments `run_experiment` executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Experiments {
    pub neighborhood: bool,
    pub degree: bool,
    pub tail: bool,
    pub deviation: bool,
    pub spectral: bool,
}

impl Default for Experiments {
    fn default() -> Self {
        Self { neighborhood: true, degree: true, tail: true, deviation: true, spectral: true }
    }
}

/// Optional acceptance gates; a failed gate is reported as a violation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Gates {
    pub max_neighborhood_tv: Option<f64>,
    pub min_decay_r2: Option<f64>,
    pub require_decay_decreasing: bool,
}

fn default_degree_samples() -> usize {
    10_000
}

fn default_tail_samples() -> usize {
    1_000
}

fn default_root_cap() -> usize {
    100_000
}

fn default_dense_cap() -> usize {
    crate::spectra::DEFAULT_DENSE_CAP
}

fn default_moment_order() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: Grid,
    /// Neighbourhood radius `t`.
    pub depth: usize,
    /// Hypergraph samples per grid point.
    pub trials: usize,
    pub gw_trials: usize,
    #[serde(default = "default_moment_order")]
    pub moment_order: usize,
    pub master_seed: u64,
    /// Where `write_outputs` puts files when no directory is passed explicitly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_degree_samples")]
    pub degree_samples: usize,
    #[serde(default = "default_tail_samples")]
    pub tail_samples: usize,
    /// Defaults to `trials`.
    #[serde(default)]
    pub deviation_trials: Option<usize>,
    /// Exploration steps scanned for deviation events; defaults to `depth`.
    #[serde(default)]
    pub deviation_depth: Option<usize>,
    #[serde(default = "default_root_cap")]
    pub root_cap: usize,
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
    #[serde(default)]
    pub experiments: Experiments,
    #[serde(default)]
    pub gates: Gates,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.n.is_empty() || g.k.is_empty() || g.r.is_empty() || g.lambda.is_empty() {
            return Err(Error::InvalidConfig("every grid axis needs at least one value".into()));
        }
        let counts = [
            ("depth", self.depth),
            ("trials", self.trials),
            ("gw_trials", self.gw_trials),
            ("moment_order", self.moment_order),
            ("degree_samples", self.degree_samples),
            ("tail_samples", self.tail_samples),
            ("root_cap", self.root_cap),
            ("deviation_trials", self.deviation_trials()),
            ("deviation_depth", self.deviation_depth()),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if let Some(&bad) = g.lambda.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::InvalidLambda(bad));
        }
        Ok(())
    }

    pub fn deviation_trials(&self) -> usize {
        self.deviation_trials.unwrap_or(self.trials)
    }

    pub fn deviation_depth(&self) -> usize {
        self.deviation_depth.unwrap_or(self.depth)
    }

    /// Valid grid points in `n, k, r, lambda` nesting order, plus a
    /// description of every skipped combination.
    pub fn points(&self) -> (Vec<ModelParams>, Vec<String>) {
        let mut points = Vec::new();
        let mut skipped = Vec::new();
        for &n in &self.grid.n {
            for &k in &self.grid.k {
                for &r in &self.grid.r {
                    for &lambda in &self.grid.lambda {
                        match ModelParams::resolve(n, k, r, lambda) {
                            Ok(p) => points.push(p),
                            Err(e) => skipped.push(format!("n={n} k={k} r={r} lambda={lambda}: {e}")),
                        }
                    }
                }
            }
        }
        (points, skipped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "grid": {"n": [10], "k": [2, 3], "r": [1, 2], "lambda": [0.0]},
        "depth": 1, "trials": 1, "gw_trials": 1, "master_seed": 0, "output_dir": "out"
    }"#;

    #[test]
    fn defaults_and_skips() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.moment_order, 8);
        assert_eq!(cfg.root_cap, 100_000);
        assert!(cfg.experiments.spectral);
        let (points, skipped) = cfg.points();
        assert_eq!(points.len(), 3);
        assert_eq!(skipped.len(), 1);
    }

    #[test]
    fn rejects_unknown_fields_and_zero_counts() {
        let extra = MINIMAL.replace("\"depth\": 1", "\"depth\": 1, \"bogus\": 3");
        assert!(ExperimentConfig::from_json(&extra).is_err());
        let zero = MINIMAL.replace("\"trials\": 1", "\"trials\": 0");
        assert!(matches!(ExperimentConfig::from_json(&zero), Err(Error::InvalidConfig(_))));
    }
}
