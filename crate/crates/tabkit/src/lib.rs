//! Tabular machine-learning toolkit.
//!
//! Everything is seed-deterministic: models, splits, ensembles, interpreters,
//! synthetic-data generators and their evaluation all draw from splittable
//! [`numkit::RngStream`]s, so a pipeline rerun with the same seed produces
//! byte-identical artifacts.
//!
//! The `examples/` directory is the front door — each example is a runnable
//! walkthrough of one capability. The `tabkit` binary exposes the same
//! operations as subcommands for shell pipelines.

pub mod cli;
pub mod data;
pub mod ensembles;
pub mod error;
pub mod explain;
pub mod llmgen;
pub mod metrics;
pub mod models;
pub mod numkit;
pub mod syneval;
pub mod tabgan;

pub use error::{Error, ErrorKind, Result};
