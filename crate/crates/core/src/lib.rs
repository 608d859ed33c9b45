//! Simulation toolkit for r-set weighted line graphs of sparse k-uniform
//! random hypergraphs and their d-block Galton-Watson local limits.
//!
//! - [`hypergraph`]: `H(n, k, p)` sampling, r-set degrees, line graphs.
//! - [`gw`]: the d-block Galton-Watson tree and its hypertree realization.
//! - [`exploration`]: breadth-first exploration and deviation events.
//! - [`topology`]: balls, canonical forms, local metric, neighbourhood
//!   measures, mass transport.
//! - [`spectra`]: adjacency spectra, empirical spectral distributions and
//!   closed-walk moments.
//! - [`harness`]: seeded Monte Carlo experiments and reports.

pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod exploration;
pub mod graph;
pub mod gw;
pub mod harness;
pub mod hypergraph;
pub mod rng;
pub mod spectra;
pub mod stats;
pub mod topology;

pub use error::{Error, Result};
pub use graph::{GraphBuilder, RootedWeightedGraph, WeightedGraph};
pub use gw::{gw_to_hypertree, sample_gw, BlockTreeSample, GwParams, RootedHypergraph};
pub use hypergraph::{build_r_line_graph, degree, sample_hypergraph, Hypergraph, ModelParams, RSet};
