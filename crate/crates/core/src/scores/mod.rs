//! The four dataset property scores and their shared machinery.
//!
//! * SImb: imbalance of each column against the uniform distribution.
//! * STood: distribution shift between two splits.
//! * IO: input-output steepness, a proxy for aleatoric noise.
//! * Outlier: mean per-point score driven by Tukey's fences.
//!
//! Every score streams its input through a [`BatchSource`] in a small number
//! of passes and keeps memory bounded by the configured sampling caps.

mod distribution;
mod engine;
pub mod histogram;
mod io;
pub mod jsd;
pub mod outlier;
pub mod quantile;
pub mod report;
pub mod source;
pub mod tukey;

pub use distribution::{simb_score, stood_score};
pub use histogram::{Histogram, DEFAULT_BINS};
pub use io::{io_score, pair_score};
pub use jsd::{jsd, jsd_probs, jsd_uniform, kl_divergence};
pub use outlier::{outlier_score, outlier_score_with, OutlierFunction, PointScorer};
pub use quantile::{quantile_sorted, quantiles, QuantileSketch, SortedSample};
pub use report::{InputFingerprint, ScoreConfig, ScoreKind, ScoreReport, SubScore};
pub use source::{Batch, BatchSource, DatasetSource, InMemorySource};
pub use tukey::{tukey_filter, TukeyFences};
