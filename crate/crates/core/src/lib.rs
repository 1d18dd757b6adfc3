//! Simulation and verification toolkit for local graph statistics on the
//! configuration model.
//!
//! The crate samples uniform multigraph matchings over a prescribed degree
//! sequence, explores truncated components, evaluates pluggable local
//! statistics, constructs the re-insertion coupling that makes a configuration
//! independent of one vertex's truncated component, evaluates the explicit
//! normal-approximation error bounds, and runs reproducible Monte Carlo
//! experiments on the fluctuations of the giant component.
//!
//! Modules follow the pipeline:
//!
//! * [`degseq`] — degree sequences, degree distributions, size-biasing and
//!   the supercriticality diagnostics.
//! * [`config`] — uniform sampling of perfect matchings of half-edges
//!   ("balls") and restriction to colour subsets.
//! * [`explore`] — truncated breadth-first exploration and exact connected
//!   components.
//! * [`stats`] — local statistics `h` and the summed statistic `U`.
//! * [`stein`] — the coupling construction and the coupling-based variance
//!   estimator.
//! * [`bounds`] — closed-form evaluators for the Wasserstein error bound and
//!   the supporting tail/intersection inequalities.
//! * [`mc`] — experiment harness: CLT studies, variance scaling, Wasserstein
//!   distance to the standard normal.
//!
//! All randomness flows through counter-based streams derived from a master
//! seed (see [`rng`]), so every experiment is reproducible bit-for-bit
//! regardless of thread count.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod config;
pub mod degseq;
pub mod error;
pub mod exec;
pub mod explore;
pub mod mc;
pub mod rng;
pub mod stats;
pub mod stein;

pub use error::{Error, Result};
