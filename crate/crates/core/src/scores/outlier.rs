use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scores::engine::{fences_for, require_columns, sketch_columns};
use crate::scores::report::{InputFingerprint, ScoreConfig, ScoreKind, ScoreReport, SubScore};
use crate::scores::source::BatchSource;
use crate::scores::tukey::TukeyFences;
use crate::storage::Group;

/// Per-point outlier score given a column's fences.
pub trait PointScorer: Sync {
    fn id(&self) -> &str;
    fn score(&self, v: f64, fences: &TukeyFences) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutlierFunction {
    /// 0 inside the inner fences, linear up to 1 at the outer fences, 1 beyond.
    #[default]
    LinearRamp,
    /// 1 outside the inner fences.
    InnerStep,
    /// 1 outside the outer fences.
    OuterStep,
}

impl PointScorer for OutlierFunction {
    fn id(&self) -> &str {
        match self {
            OutlierFunction::LinearRamp => "linear-ramp",
            OutlierFunction::InnerStep => "inner-step",
            OutlierFunction::OuterStep => "outer-step",
        }
    }

    fn score(&self, v: f64, f: &TukeyFences) -> f64 {
        let beyond_outer = v < f.outer.0 || v > f.outer.1;
        match self {
            OutlierFunction::InnerStep => f64::from(u8::from(!f.keeps(v))),
            OutlierFunction::OuterStep => f64::from(u8::from(beyond_outer)),
            OutlierFunction::LinearRamp => {
                if f.keeps(v) {
                    0.0
                } else if beyond_outer {
                    1.0
                } else if v < f.inner.0 {
                    (f.inner.0 - v) / (f.inner.0 - f.outer.0)
                } else {
                    (v - f.inner.1) / (f.outer.1 - f.inner.1)
                }
            }
        }
    }
}

impl OutlierFunction {
    pub fn parse(s: &str) -> Option<Self> {
        [Self::LinearRamp, Self::InnerStep, Self::OuterStep]
            .into_iter()
            .find(|f| f.id() == s)
    }
}

/// Outlier score with the configured point scorer.
pub fn outlier_score(source: &dyn BatchSource, group: Group, config: &ScoreConfig) -> Result<ScoreReport> {
    outlier_score_with(source, group, config, &config.outlier_function)
}

/// Per column: quartile fences, mean point score over present values;
/// overall score is the mean over columns.
pub fn outlier_score_with(
    source: &dyn BatchSource,
    group: Group,
    config: &ScoreConfig,
    scorer: &dyn PointScorer,
) -> Result<ScoreReport> {
    let names = require_columns(source, group)?;
    let sketched = sketch_columns(&[source], group, names.len(), config)?;
    let approximate = sketched.samples.iter().any(|s| !s.exact);
    let fences = fences_for(&sketched.samples)?;

    let mut sums = vec![(0.0f64, 0u64); names.len()];
    source.for_each_batch(&[group], &mut |batch| {
        sums.par_iter_mut()
            .zip(batch.group(group).par_iter())
            .zip(fences.par_iter())
            .for_each(|(((sum, count), col), f)| {
                let Some(f) = f else { return };
                for &v in col.iter().filter(|v| !v.is_nan()) {
                    *sum += scorer.score(v, f);
                    *count += 1;
                }
            });
        Ok(())
    })?;

    // columns without any value (unreached variable-length positions) are skipped
    let sub_scores: Vec<SubScore> = names
        .iter()
        .zip(&sums)
        .filter(|(_, &(_, count))| count > 0)
        .map(|(name, &(sum, count))| SubScore {
            name: name.clone(),
            value: sum / count as f64,
        })
        .collect();
    if sub_scores.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no {} values", source.describe(), group.as_str())));
    }
    Ok(ScoreReport::new(
        ScoreKind::Outlier,
        group,
        sub_scores,
        vec![InputFingerprint {
            source: source.describe(),
            rows: sketched.rows[0],
        }],
        names,
        approximate,
        config,
    ))
}
