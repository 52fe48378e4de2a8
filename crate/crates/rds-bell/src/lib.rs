//! Bell experiments with random destination sources.
//!
//! A random destination source (RDS) emits a photon pair that splits
//! between two observers with probability p, or sends both photons to one
//! side with probability (1-p)/2 each. This crate models such experiments
//! end to end:
//!
//! - [`quantum`]: two-qubit polarization states and analyzer measurements.
//! - [`source`]: the RDS event classes and the photon-number-resolving
//!   detector model.
//! - [`inequalities`]: CH, CHSH, and I3322 functionals, the full-counting
//!   outcome assignment conventions, and a brute-force local-hidden-variable
//!   bound.
//! - [`thresholds`]: the detection-pattern component decomposition of a
//!   Bell functional, critical-efficiency closed forms with bisection
//!   cross-checks, crossover analysis, and a settings optimizer.
//! - [`montecarlo`]: a seeded, stream-parallel trial simulator that checks
//!   every analytic claim statistically.
//! - [`oracle`]: exhaustive branch-tree evaluation, the independent route
//!   used to validate the component decomposition.
//! - [`cli`]: the `rds-bell` command line (thresholds, figure CSVs,
//!   simulation, self-verification) with reproducible run manifests.
//!
//! Start with the examples: `cargo run --release --example
//! detection_thresholds` and friends each demonstrate one capability.

pub mod cli;
pub mod error;
pub mod inequalities;
pub mod montecarlo;
pub mod optimize;
pub mod oracle;
pub mod quantum;
pub mod source;
pub mod thresholds;

pub use error::{Error, Result};
