//! SImb (imbalance against the uniform distribution) and STood (shift
//! between two splits). Both filter each column with Tukey's inner fences and
//! compare fixed-bin histograms with the Jensen-Shannon divergence.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scores::engine::{check_width, fences_for, kept_ranges, require_columns, sketch_columns};
use crate::scores::histogram::Histogram;
use crate::scores::jsd::{jsd, jsd_uniform};
use crate::scores::report::{InputFingerprint, ScoreConfig, ScoreKind, ScoreReport, SubScore};
use crate::scores::source::BatchSource;
use crate::scores::tukey::TukeyFences;
use crate::storage::Group;

/// Histogram slot of one column: a real histogram over the kept range, or a
/// collapsed range holding a single distinct kept value.
#[derive(Debug, Clone)]
enum Slot {
    Skip,
    Collapsed { count: u64 },
    Binned(Histogram),
}

fn slots(ranges: &[Option<(f64, f64)>], bins: usize) -> Result<Vec<Slot>> {
    ranges
        .iter()
        .map(|r| match *r {
            None => Ok(Slot::Skip),
            Some((lo, hi)) if lo == hi => Ok(Slot::Collapsed { count: 0 }),
            Some((lo, hi)) => Histogram::new(lo, hi, bins).map(Slot::Binned),
        })
        .collect()
}

fn fill(source: &dyn BatchSource, group: Group, fences: &[Option<TukeyFences>], slots: &mut [Slot]) -> Result<()> {
    source.for_each_batch(&[group], &mut |batch| {
        check_width(batch, group, slots.len())?;
        slots
            .par_iter_mut()
            .zip(batch.group(group).par_iter())
            .zip(fences.par_iter())
            .for_each(|((slot, col), f)| {
                let Some(f) = f else { return };
                for &v in col.iter().filter(|v| !v.is_nan() && f.keeps(**v)) {
                    match slot {
                        Slot::Skip => {}
                        Slot::Collapsed { count } => *count += 1,
                        Slot::Binned(h) => {
                            h.add(v);
                        }
                    }
                }
            });
        Ok(())
    })
}

fn check_bins(config: &ScoreConfig) -> Result<()> {
    if config.bins == 0 {
        return Err(Error::Config("bin count must be at least 1".into()));
    }
    Ok(())
}

/// Mean over columns of the JSD between the outlier-filtered histogram of
/// the column and the uniform distribution over the same bins. A column whose
/// kept values are all equal scores 1.
pub fn simb_score(source: &dyn BatchSource, group: Group, config: &ScoreConfig) -> Result<ScoreReport> {
    check_bins(config)?;
    let names = require_columns(source, group)?;
    let sketched = sketch_columns(&[source], group, names.len(), config)?;
    let approximate = sketched.samples.iter().any(|s| !s.exact);
    let fences = fences_for(&sketched.samples)?;
    let ranges = kept_ranges(&[source], group, &sketched.samples, &fences)?;
    let mut slots = slots(&ranges, config.bins)?;
    fill(source, group, &fences, &mut slots)?;

    let mut sub_scores = Vec::new();
    for (name, slot) in names.iter().zip(&slots) {
        let value = match slot {
            Slot::Skip => continue,
            Slot::Collapsed { .. } => 1.0,
            Slot::Binned(h) => jsd_uniform(h)?,
        };
        sub_scores.push(SubScore {
            name: name.clone(),
            value,
        });
    }
    if sub_scores.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no {} values", source.describe(), group.as_str())));
    }
    Ok(ScoreReport::new(
        ScoreKind::Simb,
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

/// Mean over columns of the JSD between the histograms of two splits. Fences
/// and bin edges are shared, computed on the union of both splits. A column
/// where only one split keeps values scores 1.
pub fn stood_score(
    a: &dyn BatchSource,
    b: &dyn BatchSource,
    group: Group,
    config: &ScoreConfig,
) -> Result<ScoreReport> {
    check_bins(config)?;
    let names = require_columns(a, group)?;
    if b.column_names(group) != names {
        return Err(Error::Config(format!(
            "{} and {} do not share {} columns",
            a.describe(),
            b.describe(),
            group.as_str()
        )));
    }
    let sketched = sketch_columns(&[a, b], group, names.len(), config)?;
    for (src, rows) in [(a, sketched.rows[0]), (b, sketched.rows[1])] {
        if rows == 0 {
            return Err(Error::EmptyInput(format!("{} has no rows", src.describe())));
        }
    }
    let approximate = sketched.samples.iter().any(|s| !s.exact);
    let fences = fences_for(&sketched.samples)?;
    let ranges = kept_ranges(&[a, b], group, &sketched.samples, &fences)?;
    let empty = slots(&ranges, config.bins)?;
    let mut slots_a = empty.clone();
    let mut slots_b = empty;
    fill(a, group, &fences, &mut slots_a)?;
    fill(b, group, &fences, &mut slots_b)?;

    let mut sub_scores = Vec::new();
    for ((name, sa), sb) in names.iter().zip(&slots_a).zip(&slots_b) {
        let (na, nb) = (slot_total(sa), slot_total(sb));
        let value = match (sa, sb) {
            (Slot::Skip, _) | (_, Slot::Skip) => continue,
            _ if na == 0 && nb == 0 => continue,
            _ if na == 0 || nb == 0 => 1.0,
            (Slot::Collapsed { .. }, Slot::Collapsed { .. }) => 0.0,
            (Slot::Binned(ha), Slot::Binned(hb)) => jsd(ha, hb)?,
            _ => unreachable!("both splits share one slot layout"),
        };
        sub_scores.push(SubScore {
            name: name.clone(),
            value,
        });
    }
    if sub_scores.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} and {} have no {} values",
            a.describe(),
            b.describe(),
            group.as_str()
        )));
    }
    Ok(ScoreReport::new(
        ScoreKind::Stood,
        group,
        sub_scores,
        vec![
            InputFingerprint {
                source: a.describe(),
                rows: sketched.rows[0],
            },
            InputFingerprint {
                source: b.describe(),
                rows: sketched.rows[1],
            },
        ],
        names,
        approximate,
        config,
    ))
}

fn slot_total(s: &Slot) -> u64 {
    match s {
        Slot::Skip => 0,
        Slot::Collapsed { count } => *count,
        Slot::Binned(h) => h.total(),
    }
}
