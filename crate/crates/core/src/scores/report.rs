use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scores::histogram::DEFAULT_BINS;
use crate::scores::outlier::OutlierFunction;
use crate::storage::Group;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Simb,
    Stood,
    Io,
    Outlier,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 4] = [ScoreKind::Simb, ScoreKind::Stood, ScoreKind::Io, ScoreKind::Outlier];

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::Simb => "simb",
            ScoreKind::Stood => "stood",
            ScoreKind::Io => "io",
            ScoreKind::Outlier => "outlier",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub bins: usize,
    /// Values kept per column for quantiles before switching to a reservoir sample.
    pub quantile_cap: usize,
    /// Rows sampled for the IO score.
    pub row_cap: usize,
    /// Feature-label pairs sampled for the IO score.
    pub pair_cap: usize,
    pub seed: u64,
    pub outlier_function: OutlierFunction,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            bins: DEFAULT_BINS,
            quantile_cap: 1_000_000,
            row_cap: 100_000,
            pair_cap: 10_000,
            seed: 0,
            outlier_function: OutlierFunction::LinearRamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubScore {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFingerprint {
    pub source: String,
    pub rows: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub kind: ScoreKind,
    pub group: Group,
    /// Arithmetic mean of `sub_scores`.
    pub overall: f64,
    pub sub_scores: Vec<SubScore>,
    pub inputs: Vec<InputFingerprint>,
    pub columns: Vec<String>,
    /// Set when any quantile or IO row sample was subsampled.
    pub approximate: bool,
    pub config: ScoreConfig,
}

impl ScoreReport {
    pub(crate) fn new(
        kind: ScoreKind,
        group: Group,
        sub_scores: Vec<SubScore>,
        inputs: Vec<InputFingerprint>,
        columns: Vec<String>,
        approximate: bool,
        config: &ScoreConfig,
    ) -> Self {
        let overall = if sub_scores.is_empty() {
            f64::NAN
        } else {
            sub_scores.iter().map(|s| s.value).sum::<f64>() / sub_scores.len() as f64
        };
        ScoreReport {
            kind,
            group,
            overall,
            sub_scores,
            inputs,
            columns,
            approximate,
            config: config.clone(),
        }
    }
}
