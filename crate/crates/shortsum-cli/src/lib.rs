//! Orchestration behind the `shortsum` binary: experiment runs, sweeps
//! over T, the randomized identity suite, and report emission.
//!
//! Numeric work lives in the `shortsum` crate; this one owns
//! configuration, file formats and verdicts.

pub mod bruteforce;
pub mod experiment;
pub mod identity;
pub mod report;

pub use experiment::{run_experiment, run_sweep, ExperimentConfig, SoftBounds, SweepConfig};
pub use identity::{identity_suite, IdentityConfig, IdentitySummary};
pub use report::{ExperimentReport, RunMeta, SweepRow, SCHEMA_VERSION};
