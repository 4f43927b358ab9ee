//! IO score: mean arctan-normalized absolute incremental ratio of labels
//! with respect to sorted feature values, over feature-label pairs.

use std::f64::consts::FRAC_2_PI;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scores::engine::{check_width, require_columns};
use crate::scores::report::{InputFingerprint, ScoreConfig, ScoreKind, ScoreReport, SubScore};
use crate::scores::source::BatchSource;
use crate::storage::Group;
use crate::util::rng;

/// Mean of `(2/pi) * atan|dl/df|` over consecutive points sorted by feature.
/// Steps with equal feature values (or a non-finite ratio) are skipped;
/// `None` when no step remains.
pub fn pair_score(feature: &[f64], label: &[f64]) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = feature
        .iter()
        .zip(label)
        .filter(|(f, l)| !f.is_nan() && !l.is_nan())
        .map(|(&f, &l)| (f, l))
        .collect();
    // ties broken by label so the result does not depend on row order
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut sum = 0.0;
    let mut n = 0u64;
    for w in pts.windows(2) {
        let (f0, l0) = w[0];
        let (f1, l1) = w[1];
        if f1 == f0 {
            continue;
        }
        let delta = (l1 - l0) / (f1 - f0);
        if !delta.is_finite() {
            continue;
        }
        sum += FRAC_2_PI * delta.abs().atan();
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

struct RowReservoir {
    cap: usize,
    seen: u64,
    rows: Vec<(u64, Vec<f64>, Vec<f64>)>,
}

/// IO score over feature-label pairs. At most `pair_cap` pairs and
/// `row_cap` rows are used, each sampled with the configured seed.
pub fn io_score(source: &dyn BatchSource, config: &ScoreConfig) -> Result<ScoreReport> {
    let fnames = require_columns(source, Group::Features)?;
    let lnames = require_columns(source, Group::Labels)?;
    if config.pair_cap == 0 || config.row_cap < 2 {
        return Err(Error::Config("IO score needs pair cap >= 1 and row cap >= 2".into()));
    }
    let (nf, nl) = (fnames.len(), lnames.len());
    let total_pairs = nf * nl;
    let pairs: Vec<(usize, usize)> = if total_pairs <= config.pair_cap {
        (0..total_pairs).map(|i| (i / nl, i % nl)).collect()
    } else {
        let mut idx = sample(&mut rng(config.seed, 0x10_0001), total_pairs, config.pair_cap).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| (i / nl, i % nl)).collect()
    };

    // only the columns touched by a sampled pair are kept per row
    let mut fcols: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    fcols.sort_unstable();
    fcols.dedup();
    let mut lcols: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    lcols.sort_unstable();
    lcols.dedup();

    let mut reservoir = RowReservoir {
        cap: config.row_cap,
        seen: 0,
        rows: Vec::new(),
    };
    let mut row_rng = rng(config.seed, 0x10_0002);
    source.for_each_batch(&[Group::Features, Group::Labels], &mut |batch| {
        check_width(batch, Group::Features, nf)?;
        check_width(batch, Group::Labels, nl)?;
        for r in 0..batch.rows() {
            let idx = reservoir.seen;
            reservoir.seen += 1;
            let slot = if reservoir.rows.len() < reservoir.cap {
                None
            } else {
                let j = row_rng.gen_range(0..reservoir.seen);
                if (j as usize) < reservoir.cap {
                    Some(j as usize)
                } else {
                    continue;
                }
            };
            let row = (
                idx,
                fcols.iter().map(|&c| batch.features[c][r]).collect(),
                lcols.iter().map(|&c| batch.labels[c][r]).collect(),
            );
            match slot {
                None => reservoir.rows.push(row),
                Some(j) => reservoir.rows[j] = row,
            }
        }
        Ok(())
    })?;
    if reservoir.seen < 2 {
        return Err(Error::EmptyInput(format!(
            "IO score needs at least 2 data points, {} has {}",
            source.describe(),
            reservoir.seen
        )));
    }
    let approximate = reservoir.seen as usize > reservoir.rows.len();
    reservoir.rows.sort_unstable_by_key(|r| r.0);

    let scored: Vec<Option<f64>> = pairs
        .par_iter()
        .map(|&(k, m)| {
            let fi = fcols.binary_search(&k).expect("sampled feature column");
            let li = lcols.binary_search(&m).expect("sampled label column");
            let f: Vec<f64> = reservoir.rows.iter().map(|r| r.1[fi]).collect();
            let l: Vec<f64> = reservoir.rows.iter().map(|r| r.2[li]).collect();
            pair_score(&f, &l)
        })
        .collect();

    let sub_scores: Vec<SubScore> = pairs
        .iter()
        .zip(scored)
        .filter_map(|(&(k, m), s)| {
            s.map(|value| SubScore {
                name: format!("{}:{}", fnames[k], lnames[m]),
                value,
            })
        })
        .collect();
    if sub_scores.is_empty() {
        return Err(Error::UndefinedScore(
            "no feature-label pair has two distinct feature values".into(),
        ));
    }
    let mut columns = fnames;
    columns.extend(lnames);
    Ok(ScoreReport::new(
        ScoreKind::Io,
        Group::Features,
        sub_scores,
        vec![InputFingerprint {
            source: source.describe(),
            rows: reservoir.seen,
        }],
        columns,
        approximate,
        config,
    ))
}
