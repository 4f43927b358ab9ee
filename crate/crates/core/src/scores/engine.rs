//! Shared streaming passes: per-column quantile sketches, fences and kept
//! ranges. Each column is accumulated sequentially in row order; rayon only
//! spreads columns over threads, so results do not depend on thread count
//! or batch size.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scores::quantile::{QuantileSketch, SortedSample};
use crate::scores::report::ScoreConfig;
use crate::scores::source::{Batch, BatchSource};
use crate::scores::tukey::TukeyFences;
use crate::storage::Group;
use crate::util::rng;

pub(crate) struct Sketched {
    pub samples: Vec<SortedSample>,
    /// Rows streamed per source.
    pub rows: Vec<u64>,
}

pub(crate) fn check_width(batch: &Batch, group: Group, width: usize) -> Result<()> {
    let got = batch.group(group).len();
    if got != width {
        return Err(Error::Shape {
            sub_feature: group.as_str().into(),
            message: format!("batch has {got} columns, expected {width}"),
        });
    }
    Ok(())
}

/// One pass over every source, in order, into shared per-column sketches.
pub(crate) fn sketch_columns(
    sources: &[&dyn BatchSource],
    group: Group,
    width: usize,
    config: &ScoreConfig,
) -> Result<Sketched> {
    let mut sketches: Vec<QuantileSketch> = (0..width)
        .map(|c| QuantileSketch::new(config.quantile_cap, rng(config.seed, 0x51ce_0000 + c as u64)))
        .collect();
    let mut rows = Vec::with_capacity(sources.len());
    for source in sources {
        let mut n = 0u64;
        source.for_each_batch(&[group], &mut |batch| {
            check_width(batch, group, width)?;
            n += batch.rows() as u64;
            sketches
                .par_iter_mut()
                .zip(batch.group(group).par_iter())
                .for_each(|(sketch, col)| col.iter().filter(|v| !v.is_nan()).for_each(|&v| sketch.push(v)));
            Ok(())
        })?;
        rows.push(n);
    }
    Ok(Sketched {
        samples: sketches.into_iter().map(QuantileSketch::finish).collect(),
        rows,
    })
}

/// Fences per column; `None` for columns without any value.
pub(crate) fn fences_for(samples: &[SortedSample]) -> Result<Vec<Option<TukeyFences>>> {
    samples
        .iter()
        .map(|s| {
            if s.values.is_empty() {
                Ok(None)
            } else {
                TukeyFences::from_sorted(&s.values).map(Some)
            }
        })
        .collect()
}

/// Min and max of the values inside the inner fences, per column. Exact
/// samples answer directly; otherwise one more pass over the sources.
pub(crate) fn kept_ranges(
    sources: &[&dyn BatchSource],
    group: Group,
    samples: &[SortedSample],
    fences: &[Option<TukeyFences>],
) -> Result<Vec<Option<(f64, f64)>>> {
    if samples.iter().all(|s| s.exact) {
        return Ok(samples
            .iter()
            .zip(fences)
            .map(|(s, f)| {
                let f = (*f)?;
                let lo = s.values.iter().find(|v| f.keeps(**v))?;
                let hi = s.values.iter().rev().find(|v| f.keeps(**v))?;
                Some((*lo, *hi))
            })
            .collect());
    }
    let mut ranges: Vec<Option<(f64, f64)>> = vec![None; fences.len()];
    for source in sources {
        source.for_each_batch(&[group], &mut |batch| {
            check_width(batch, group, fences.len())?;
            ranges
                .par_iter_mut()
                .zip(batch.group(group).par_iter())
                .zip(fences.par_iter())
                .for_each(|((range, col), f)| {
                    let Some(f) = f else { return };
                    for &v in col.iter().filter(|v| !v.is_nan() && f.keeps(**v)) {
                        *range = Some(match *range {
                            None => (v, v),
                            Some((lo, hi)) => (lo.min(v), hi.max(v)),
                        });
                    }
                });
            Ok(())
        })?;
    }
    Ok(ranges)
}

pub(crate) fn require_columns(source: &dyn BatchSource, group: Group) -> Result<Vec<String>> {
    let names = source.column_names(group);
    if names.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} has no {} columns",
            source.describe(),
            group.as_str()
        )));
    }
    Ok(names)
}
