//! Config-driven experiments for signed graphon opinion dynamics: sampling,
//! single runs, convergence sweeps, bound checks and degree statistics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
mod error;
pub mod output;
pub mod registry;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::HarnessError;
