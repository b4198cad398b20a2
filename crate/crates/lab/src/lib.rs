//! Seeded Monte Carlo experiments on quadratic Wasserstein statistics of
//! Gaussian samples, with CSV and JSON reporting.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod pool;
pub mod report;

pub use config::{ConfigLayer, ExperimentConfig, ExperimentKind};
pub use error::{LabError, Result};
pub use report::Report;
