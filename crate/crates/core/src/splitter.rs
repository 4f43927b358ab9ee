//! Out-of-distribution splits over real or virtual coordinates.
//!
//! A share of the distinct spatial ids and of the distinct values of each
//! time component is sampled. Points whose coordinates match the sample are
//! out-of-distribution and go to val or test; every other point is train.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data_model::{DatasetSchema, SplitShares, TableName};
use crate::error::{Error, Result};
use crate::storage::side::csv_error;
use crate::storage::{write_manifest, ColumnData, DataFrameSlice, DatasetHandle, TableWriter};
use crate::util::{stable_hash, unit_interval};

const BATCH: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combination {
    /// Out-of-distribution when spatially or temporally matched.
    #[default]
    Union,
    /// Out-of-distribution when spatially and temporally matched.
    Intersection,
}

impl Combination {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "union" => Some(Combination::Union),
            "intersection" => Some(Combination::Intersection),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalMatch {
    /// At least one time component holds a sampled value.
    #[default]
    AnyComponent,
    AllComponents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub spatial_fraction: f64,
    pub temporal_fraction: f64,
    pub combination: Combination,
    pub temporal_match: TemporalMatch,
    /// Share of out-of-distribution points sent to val; the rest go to test.
    pub val_ratio: f64,
    pub seed: u64,
    /// Sample time values in aligned blocks of this many consecutive values.
    pub temporal_block: Option<usize>,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            spatial_fraction: 0.2,
            temporal_fraction: 0.2,
            combination: Combination::Union,
            temporal_match: TemporalMatch::AnyComponent,
            val_ratio: 0.5,
            seed: 0,
            temporal_block: None,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("spatial fraction", self.spatial_fraction),
            ("temporal fraction", self.temporal_fraction),
            ("val ratio", self.val_ratio),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{what} {v} is outside [0, 1]")));
            }
        }
        if self.temporal_block == Some(0) {
            return Err(Error::Config("temporal block size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Value of a coordinate column. Numbers order before identifiers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordValue {
    Num(f64),
    Id(String),
}

impl PartialEq for CoordValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CoordValue {}

impl PartialOrd for CoordValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CoordValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (CoordValue::Num(a), CoordValue::Num(b)) => a.total_cmp(b),
            (CoordValue::Num(_), CoordValue::Id(_)) => Ordering::Less,
            (CoordValue::Id(_), CoordValue::Num(_)) => Ordering::Greater,
            (CoordValue::Id(a), CoordValue::Id(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for CoordValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoordValue::Num(v) => write!(f, "{v}"),
            CoordValue::Id(s) => f.write_str(s),
        }
    }
}

/// Distinct coordinate values of a dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoordinateDomains {
    /// Spatial ids: the space coordinate cells of a point joined with `|`.
    pub spatial: BTreeSet<String>,
    /// Per time component, in schema order.
    pub temporal: Vec<BTreeSet<CoordValue>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampledCoordinates {
    pub spatial: BTreeSet<String>,
    pub temporal: Vec<BTreeSet<CoordValue>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        Self::ALL.into_iter().find(|v| v.as_str() == s)
    }

    pub fn table(self) -> TableName {
        match self {
            Split::Train => TableName::Train,
            Split::Val => TableName::Val,
            Split::Test => TableName::Test,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: u64,
    pub val: u64,
    pub test: u64,
}

impl SplitCounts {
    fn add(&mut self, s: Split) {
        match s {
            Split::Train => self.train += 1,
            Split::Val => self.val += 1,
            Split::Test => self.test += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.train + self.val + self.test
    }

    /// Realized shares; all zero for an empty assignment.
    pub fn shares(&self) -> SplitShares {
        let n = self.total().max(1) as f64;
        SplitShares::new(self.train as f64 / n, self.val as f64 / n, self.test as f64 / n)
    }
}

/// Split label for every row of every table of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub dataset: String,
    pub spec: SplitSpec,
    pub sampled: SampledCoordinates,
    pub counts: SplitCounts,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub rows: BTreeMap<TableName, Vec<Split>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OodReport {
    pub counts: SplitCounts,
    pub shares: SplitShares,
    pub leaked: u64,
}

/// Number of values sampled for a fraction of a domain.
pub fn sample_size(fraction: f64, domain: usize) -> usize {
    ((fraction * domain as f64) + 1e-9).floor() as usize
}

fn by_hash<T, K: AsRef<[u8]>>(items: Vec<T>, seed: u64, salt: &str, key: impl Fn(&T) -> K) -> Vec<T> {
    let mut keyed: Vec<(u64, T)> = items
        .into_iter()
        .map(|t| (stable_hash(seed, salt, key(&t).as_ref()), t))
        .collect();
    keyed.sort_by_key(|(h, _)| *h);
    keyed.into_iter().map(|(_, t)| t).collect()
}

/// Nested sample: the hash-sorted prefix of the domain, so a larger
/// fraction always yields a superset.
fn nested_sample<T: Clone + Ord + fmt::Display>(
    domain: &BTreeSet<T>,
    fraction: f64,
    seed: u64,
    salt: &str,
    block: Option<usize>,
) -> Result<BTreeSet<T>> {
    if fraction > 0.0 && domain.is_empty() {
        return Err(Error::EmptyDomain(format!("{salt} domain is empty")));
    }
    let target = sample_size(fraction, domain.len());
    if target == 0 {
        return Ok(BTreeSet::new());
    }
    let sorted: Vec<T> = domain.iter().cloned().collect();
    match block {
        None | Some(1) => {
            let order = by_hash(sorted, seed, salt, |v| v.to_string());
            Ok(order.into_iter().take(target).collect())
        }
        Some(k) => {
            let chunks: Vec<(usize, &[T])> = sorted.chunks(k).enumerate().collect();
            let order = by_hash(chunks, seed, salt, |(i, _)| i.to_le_bytes());
            Ok(order
                .into_iter()
                .take(target.div_ceil(k))
                .flat_map(|(_, c)| c.iter().cloned())
                .collect())
        }
    }
}

/// Samples spatial ids and per-component time values. Time components share
/// the spec's fraction and blocking.
pub fn sample_coordinates(domains: &CoordinateDomains, spec: &SplitSpec) -> Result<SampledCoordinates> {
    spec.validate()?;
    let spatial = nested_sample(&domains.spatial, spec.spatial_fraction, spec.seed, "space", None)?;
    let temporal = domains
        .temporal
        .iter()
        .enumerate()
        .map(|(c, d)| nested_sample(d, spec.temporal_fraction, spec.seed, &format!("time{c}"), spec.temporal_block))
        .collect::<Result<_>>()?;
    Ok(SampledCoordinates { spatial, temporal })
}

/// Coordinate cells of one row.
struct RowCoords {
    spatial: Option<String>,
    temporal: Vec<CoordValue>,
}

struct CoordReader {
    time: Vec<usize>,
    space: Vec<usize>,
}

impl CoordReader {
    fn new(handle: &DatasetHandle) -> Result<Self> {
        let layout = handle.layout();
        if layout.time_coords.is_empty() && layout.space_coords.is_empty() {
            return Err(Error::SchemaMismatch {
                table: handle.schema().name.clone(),
                row: None,
                message: "schema declares no coordinate columns".into(),
            });
        }
        Ok(CoordReader {
            time: layout.time_coords.clone(),
            space: layout.space_coords.clone(),
        })
    }

    fn value(slice: &DataFrameSlice, col: usize, row: usize) -> CoordValue {
        match slice.column_at(col) {
            ColumnData::Numeric(v) => CoordValue::Num(v[row]),
            ColumnData::Ids(v) => CoordValue::Id(v[row].clone()),
            ColumnData::Blocks(_) => unreachable!("raw slices hold no resolved blocks"),
        }
    }

    fn read(&self, slice: &DataFrameSlice, row: usize) -> RowCoords {
        let spatial = (!self.space.is_empty()).then(|| {
            self.space
                .iter()
                .map(|&c| Self::value(slice, c, row).to_string())
                .collect::<Vec<_>>()
                .join("|")
        });
        RowCoords {
            spatial,
            temporal: self.time.iter().map(|&c| Self::value(slice, c, row)).collect(),
        }
    }
}

fn key_bytes(c: &RowCoords) -> Vec<u8> {
    let mut out = c.spatial.clone().unwrap_or_default().into_bytes();
    for t in &c.temporal {
        out.push(0x1f);
        out.extend(t.to_string().bytes());
    }
    out
}

fn for_each_row(handle: &DatasetHandle, mut f: impl FnMut(TableName, &DataFrameSlice, usize) -> Result<()>) -> Result<()> {
    for table in handle.table_names() {
        for slice in handle.stream_slices(table, BATCH)? {
            let slice = slice?;
            for r in 0..slice.len() {
                f(table, &slice, r)?;
            }
        }
    }
    Ok(())
}

pub fn coordinate_domains(handle: &DatasetHandle) -> Result<CoordinateDomains> {
    let reader = CoordReader::new(handle)?;
    let mut d = CoordinateDomains {
        spatial: BTreeSet::new(),
        temporal: vec![BTreeSet::new(); reader.time.len()],
    };
    for_each_row(handle, |_, slice, r| {
        let c = reader.read(slice, r);
        if let Some(s) = c.spatial {
            d.spatial.insert(s);
        }
        for (set, v) in d.temporal.iter_mut().zip(c.temporal) {
            set.insert(v);
        }
        Ok(())
    })?;
    Ok(d)
}

struct Matcher<'a> {
    spec: &'a SplitSpec,
    sampled: &'a SampledCoordinates,
}

impl Matcher<'_> {
    fn spatial(&self, c: &RowCoords) -> Option<bool> {
        c.spatial.as_ref().map(|s| self.sampled.spatial.contains(s))
    }

    fn temporal(&self, c: &RowCoords) -> Option<bool> {
        if c.temporal.is_empty() {
            return None;
        }
        let mut hits = c.temporal.iter().zip(&self.sampled.temporal).map(|(v, set)| set.contains(v));
        Some(match self.spec.temporal_match {
            TemporalMatch::AnyComponent => hits.any(|h| h),
            TemporalMatch::AllComponents => hits.all(|h| h),
        })
    }

    /// Coordinate kinds missing from the schema do not take part.
    fn is_ood(&self, c: &RowCoords) -> bool {
        let parts = [self.spatial(c), self.temporal(c)];
        let mut present = parts.iter().flatten();
        match self.spec.combination {
            Combination::Union => present.any(|&b| b),
            Combination::Intersection => present.all(|&b| b),
        }
    }

    fn describe(&self, c: &RowCoords, schema: &DatasetSchema) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(s) = c.spatial.as_ref().filter(|s| self.sampled.spatial.contains(*s)) {
            out.push(format!("space {s}"));
        }
        for ((v, set), name) in c.temporal.iter().zip(&self.sampled.temporal).zip(&schema.coordinates.time) {
            if set.contains(v) {
                out.push(format!("{name}={v}"));
            }
        }
        out
    }

    fn split(&self, c: &RowCoords) -> Split {
        if !self.is_ood(c) {
            Split::Train
        } else if unit_interval(stable_hash(self.spec.seed, "val-test", &key_bytes(c))) < self.spec.val_ratio {
            Split::Val
        } else {
            Split::Test
        }
    }
}

/// Assigns every row of every table of the dataset to train, val or test.
pub fn assign_splits(handle: &DatasetHandle, spec: &SplitSpec) -> Result<SplitAssignment> {
    spec.validate()?;
    let reader = CoordReader::new(handle)?;
    let domains = coordinate_domains(handle)?;
    let sampled = sample_coordinates(&domains, spec)?;
    let matcher = Matcher {
        spec,
        sampled: &sampled,
    };
    let mut rows: BTreeMap<TableName, Vec<Split>> = BTreeMap::new();
    let mut counts = SplitCounts::default();
    for_each_row(handle, |table, slice, r| {
        let s = matcher.split(&reader.read(slice, r));
        counts.add(s);
        rows.entry(table).or_default().push(s);
        Ok(())
    })?;
    for table in handle.table_names() {
        rows.entry(table).or_default();
    }
    let mut warnings = Vec::new();
    if counts.train == 0 && counts.total() > 0 {
        let w = "split has no training points".to_string();
        log::warn!("{}: {w}", handle.schema().name);
        warnings.push(w);
    }
    Ok(SplitAssignment {
        dataset: handle.schema().name.clone(),
        spec: spec.clone(),
        sampled,
        counts,
        warnings,
        rows,
    })
}

/// Checks that no train point matches the sampled coordinates and that the
/// assignment covers the dataset exactly; reports realized shares.
pub fn verify_ood(assignment: &SplitAssignment, handle: &DatasetHandle) -> Result<OodReport> {
    let reader = CoordReader::new(handle)?;
    let matcher = Matcher {
        spec: &assignment.spec,
        sampled: &assignment.sampled,
    };
    let mut counts = SplitCounts::default();
    let mut offending: BTreeSet<String> = BTreeSet::new();
    let mut leaked = 0u64;
    for table in handle.table_names() {
        let labels = assignment
            .rows
            .get(&table)
            .ok_or_else(|| Error::Config(format!("assignment has no rows for the {table} table")))?;
        let mut seen = 0usize;
        for slice in handle.stream_slices(table, BATCH)? {
            let slice = slice?;
            for r in 0..slice.len() {
                let split = *labels.get(seen).ok_or_else(|| {
                    Error::Config(format!("assignment covers {} rows of the {table} table", labels.len()))
                })?;
                seen += 1;
                counts.add(split);
                if split == Split::Train {
                    let c = reader.read(&slice, r);
                    if matcher.is_ood(&c) {
                        leaked += 1;
                        offending.extend(matcher.describe(&c, handle.schema()));
                    }
                }
            }
        }
        if seen != labels.len() {
            return Err(Error::Config(format!(
                "assignment has {} rows for the {table} table, dataset has {seen}",
                labels.len()
            )));
        }
    }
    if leaked > 0 {
        return Err(Error::Leakage(offending.into_iter().collect()));
    }
    Ok(OodReport {
        counts,
        shares: counts.shares(),
        leaked,
    })
}

pub const ASSIGNMENT_FILE: &str = "assignment.csv";
pub const ASSIGNMENT_META_FILE: &str = "assignment.json";

#[derive(Serialize, Deserialize)]
struct AssignmentMeta {
    version: String,
    #[serde(flatten)]
    assignment: SplitAssignment,
    shares: SplitShares,
}

/// Writes `assignment.csv` (`table,row,split`) and `assignment.json`
/// (spec, seed, sampled coordinates, counts) into `dir`.
pub fn write_assignment(assignment: &SplitAssignment, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let csv_path = dir.join(ASSIGNMENT_FILE);
    let origin = csv_path.display().to_string();
    let file = File::create(&csv_path).map_err(|e| Error::io(&origin, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["table", "row", "split"]).map_err(|e| csv_error(&origin, e))?;
    for (table, labels) in &assignment.rows {
        for (i, s) in labels.iter().enumerate() {
            w.write_record([table.as_str(), &i.to_string(), s.as_str()])
                .map_err(|e| csv_error(&origin, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&origin, e))?;

    let meta_path = dir.join(ASSIGNMENT_META_FILE);
    let meta = AssignmentMeta {
        version: crate::VERSION.to_string(),
        assignment: assignment.clone(),
        shares: assignment.counts.shares(),
    };
    let mut text = serde_json::to_string_pretty(&meta).expect("assignment metadata serializes");
    text.push('\n');
    std::fs::write(&meta_path, text).map_err(|e| Error::io(meta_path.display().to_string(), e))?;
    Ok((csv_path, meta_path))
}

pub fn read_assignment(dir: &Path) -> Result<SplitAssignment> {
    let meta_path = dir.join(ASSIGNMENT_META_FILE);
    let origin = meta_path.display().to_string();
    let file = File::open(&meta_path).map_err(|e| Error::io(&origin, e))?;
    let meta: AssignmentMeta = serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Parse {
        path: origin.clone(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut assignment = meta.assignment;

    let csv_path = dir.join(ASSIGNMENT_FILE);
    let origin = csv_path.display().to_string();
    let file = File::open(&csv_path).map_err(|e| Error::io(&origin, e))?;
    let mut r = csv::Reader::from_reader(BufReader::new(file));
    let mut rows: BTreeMap<TableName, Vec<Split>> = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(&origin, e))?;
        let bad = |message: String| Error::Parse {
            path: origin.clone(),
            line: i + 2,
            column: 1,
            message,
        };
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 cells, found {}", rec.len())));
        }
        let table = TableName::parse(&rec[0]).ok_or_else(|| bad(format!("unknown table `{}`", &rec[0])))?;
        let row: usize = rec[1].parse().map_err(|_| bad(format!("malformed row index `{}`", &rec[1])))?;
        let split = Split::parse(&rec[2]).ok_or_else(|| bad(format!("unknown split `{}`", &rec[2])))?;
        let labels = rows.entry(table).or_default();
        if row != labels.len() {
            return Err(bad(format!("row {row} out of order")));
        }
        labels.push(split);
    }
    assignment.rows = rows;
    Ok(assignment)
}

/// Writes the split dataset (train/val/test tables, copied side stores and
/// a manifest with the realized shares) into `out_dir`.
pub fn materialize(handle: &DatasetHandle, assignment: &SplitAssignment, out_dir: &Path) -> Result<PathBuf> {
    if assignment.counts.total() == 0 {
        return Err(Error::EmptyInput("assignment holds no rows".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let mut schema = handle.schema().clone();
    schema.tables = Split::ALL
        .iter()
        .map(|s| (s.table(), format!("{}.csv", s.as_str())))
        .collect();
    schema.shares = assignment.counts.shares();

    let mut writers = Split::ALL
        .iter()
        .map(|s| TableWriter::create(&out_dir.join(&schema.tables[&s.table()]), handle.layout()))
        .collect::<Result<Vec<_>>>()?;
    for table in handle.table_names() {
        let labels = &assignment.rows.get(&table).map(Vec::as_slice).unwrap_or_default();
        let mut seen = 0usize;
        for slice in handle.stream_slices(table, BATCH)? {
            let slice = slice?;
            for r in 0..slice.len() {
                let split = labels.get(seen).ok_or_else(|| {
                    Error::Config(format!("assignment covers {} rows of the {table} table", labels.len()))
                })?;
                writers[*split as usize].write_slice_row(&slice, r)?;
                seen += 1;
            }
        }
    }
    for w in writers {
        w.finish()?;
    }
    for m in &schema.mappings {
        let to = out_dir.join(&m.file);
        if let Some(parent) = to.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
        let from = handle.root.join(&m.file);
        std::fs::copy(&from, &to).map_err(|e| Error::io(from.display().to_string(), e))?;
    }
    write_manifest(&schema, out_dir)
}
