//! Full dataset profile: every score on every applicable split combination,
//! plus the capacity row.

use serde::{Deserialize, Serialize};

use crate::capacity::{capacity_with, CapacityReport, DatasetDims, DimOverride};
use crate::data_model::TableName;
use crate::error::{Error, Result};
use crate::scores::{io_score, outlier_score, simb_score, stood_score, DatasetSource, ScoreConfig, ScoreReport};
use crate::storage::{DatasetHandle, Group};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub scores: ScoreConfig,
    pub batch_size: usize,
    pub capacity_override: DimOverride,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            scores: ScoreConfig::default(),
            batch_size: 8192,
            capacity_override: DimOverride::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PerSplit {
    pub train: Option<f64>,
    pub val: Option<f64>,
    pub test: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PerGroup<T> {
    pub features: T,
    pub labels: T,
}

/// Shift of val and test against train.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Shift {
    pub val: Option<f64>,
    pub test: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutlierRow {
    pub train: Option<f64>,
    pub val: Option<f64>,
    pub test: Option<f64>,
    pub overall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub dataset: String,
    pub version: String,
    pub seed: u64,
    pub config: ProfileConfig,
    pub tables: Vec<TableName>,
    pub simb: PerGroup<PerSplit>,
    pub stood: PerGroup<Shift>,
    pub io: Option<f64>,
    pub outlier: OutlierRow,
    pub capacity: CapacityReport,
    /// Scores that could not be computed, with the reason.
    pub notes: Vec<String>,
    pub details: Vec<ScoreReport>,
}

fn fmt3(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.3}"))
}

impl ProfileReport {
    /// Score row: SImb features and labels (train/val/test), STood features
    /// and labels (val/test), IO, Outlier (train/val/test/overall).
    pub fn table_row(&self) -> String {
        let s = |p: &PerSplit| format!("{}/{}/{}", fmt3(p.train), fmt3(p.val), fmt3(p.test));
        let t = |p: &Shift| format!("{}/{}", fmt3(p.val), fmt3(p.test));
        let o = &self.outlier;
        format!(
            "{} | {} | {} | {} | {} | {} | {}/{}/{}/{}",
            self.dataset,
            s(&self.simb.features),
            s(&self.simb.labels),
            t(&self.stood.features),
            t(&self.stood.labels),
            fmt3(self.io),
            fmt3(o.train),
            fmt3(o.val),
            fmt3(o.test),
            fmt3(o.overall)
        )
    }
}

pub const TABLE_HEADER: &str = "dataset | SImb features t/v/t | SImb labels t/v/t | STood features v/t | STood labels v/t | IO | Outlier t/v/t/all";

/// Degenerate inputs become notes; anything else aborts the profile.
fn soft(result: Result<ScoreReport>, what: &str, notes: &mut Vec<String>, details: &mut Vec<ScoreReport>) -> Result<Option<f64>> {
    match result {
        Ok(r) => {
            let v = r.overall;
            details.push(r);
            Ok(Some(v))
        }
        Err(
            e @ (Error::EmptyInput(_)
            | Error::UndefinedScore(_)
            | Error::UnsupportedFeature(_)
            | Error::DegenerateGeometry(_)),
        ) => {
            notes.push(format!("{what}: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn count_rows(handle: &DatasetHandle, table: TableName, batch: usize) -> Result<u64> {
    if let Some(n) = handle.row_count(table) {
        return Ok(n);
    }
    let mut n = 0;
    for s in handle.stream_slices(table, batch)? {
        n += s?.len() as u64;
    }
    Ok(n)
}

pub fn profile(handle: &DatasetHandle, config: &ProfileConfig) -> Result<ProfileReport> {
    if config.batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    let sc = &config.scores;
    let splits: Vec<TableName> = [TableName::Train, TableName::Val, TableName::Test]
        .into_iter()
        .filter(|t| handle.has_table(*t))
        .collect();
    let all: Vec<TableName> = if splits.is_empty() { handle.table_names() } else { splits.clone() };
    let mut notes = Vec::new();
    let mut details = Vec::new();
    if splits.is_empty() {
        notes.push("dataset has no train/val/test tables; only overall scores are computed".into());
    }
    let source = |tables: &[TableName]| DatasetSource::new(handle, tables, config.batch_size);

    let mut simb = PerGroup::<PerSplit>::default();
    for (group, row) in [(Group::Features, &mut simb.features), (Group::Labels, &mut simb.labels)] {
        for &t in &splits {
            let what = format!("SImb {} {t}", group.as_str());
            let v = soft(simb_score(&source(&[t])?, group, sc), &what, &mut notes, &mut details)?;
            match t {
                TableName::Train => row.train = v,
                TableName::Val => row.val = v,
                TableName::Test => row.test = v,
                TableName::Pool => {}
            }
        }
    }

    let mut stood = PerGroup::<Shift>::default();
    if handle.has_table(TableName::Train) {
        let train = source(&[TableName::Train])?;
        for (group, row) in [(Group::Features, &mut stood.features), (Group::Labels, &mut stood.labels)] {
            for t in [TableName::Val, TableName::Test] {
                if !handle.has_table(t) {
                    continue;
                }
                let what = format!("STood {} train-{t}", group.as_str());
                let v = soft(stood_score(&train, &source(&[t])?, group, sc), &what, &mut notes, &mut details)?;
                if t == TableName::Val {
                    row.val = v;
                } else {
                    row.test = v;
                }
            }
        }
    }

    let io = soft(io_score(&source(&all)?, sc), "IO", &mut notes, &mut details)?;

    let mut outlier = OutlierRow::default();
    for &t in &splits {
        let v = soft(outlier_score(&source(&[t])?, Group::Features, sc), &format!("Outlier {t}"), &mut notes, &mut details)?;
        match t {
            TableName::Train => outlier.train = v,
            TableName::Val => outlier.val = v,
            TableName::Test => outlier.test = v,
            TableName::Pool => {}
        }
    }
    outlier.overall = soft(
        outlier_score(&source(&all)?, Group::Features, sc),
        "Outlier overall",
        &mut notes,
        &mut details,
    )?;

    let mut n = 0;
    for &t in &all {
        n += count_rows(handle, t, config.batch_size)?;
    }
    let dims = DatasetDims::from_schema(handle.schema(), n.max(1))?;
    let capacity = capacity_with(&dims, config.capacity_override)?;

    Ok(ProfileReport {
        dataset: handle.schema().name.clone(),
        version: crate::VERSION.to_string(),
        seed: sc.seed,
        config: config.clone(),
        tables: all,
        simb,
        stood,
        io,
        outlier,
        capacity,
        notes,
        details,
    })
}
