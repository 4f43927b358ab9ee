//! Streaming profiler for datasets in a unified spatio-temporal
//! representation.
//!
//! Datasets are described by a TOML manifest ([`data_model::DatasetSchema`]),
//! stored as CSV main tables plus side stores ([`storage`]), and profiled
//! with four property scores ([`scores`]), over-parameterization thresholds
//! ([`capacity`]), coordinate-based out-of-distribution splits ([`splitter`])
//! and random-forest baselines ([`benchmark`]).

pub mod benchmark;
pub mod capacity;
pub mod data_model;
pub mod error;
pub mod profile;
pub mod scores;
pub mod splitter;
pub mod storage;
mod util;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
