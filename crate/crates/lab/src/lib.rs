//! Experiment runner for `yorlab-core`.
//!
//! Each named experiment turns a [`config::ExperimentConfig`] into a list of
//! pass/fail [`report::Check`]s plus CSV tables. Replica batches run on the
//! rayon pool; replica `i` always draws from `RngStream::new(seed, i)`, so
//! results do not depend on the number of worker threads.

pub mod batch;
pub mod config;
pub mod experiments;
pub mod report;
pub mod sampling;

pub use config::{ExperimentConfig, Params};
pub use experiments::{run_experiment, Experiment, EXPERIMENTS};
pub use report::{Check, Outcome, Provenance, Table};
