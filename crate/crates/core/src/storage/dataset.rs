use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::data_model::{Binding, BoundSubFeature, ColumnRole, DatasetSchema, Point, TableLayout, TableName, ValueClass};
use crate::error::{Error, Result};
use crate::storage::side::{SideStore, ValueBlock};
use crate::storage::slice::{ColumnData, DataFrameSlice};
use crate::storage::table::{MainTable, SliceIter};

/// Feature or label half of a data point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Features,
    Labels,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Features => "features",
            Group::Labels => "labels",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OpenOptions {
    /// Scan every table once at open time: checks row arity, numeric cells
    /// and mapping identifiers, and records row counts.
    pub verify: bool,
    pub verify_batch: usize,
}

impl Default for OpenOptions {
    fn default() -> Self {
        OpenOptions {
            verify: true,
            verify_batch: 8192,
        }
    }
}

/// Open dataset: schema, per-split main tables and loaded side stores.
#[derive(Debug, Clone)]
pub struct DatasetHandle {
    pub root: PathBuf,
    schema: Arc<DatasetSchema>,
    layout: Arc<TableLayout>,
    tables: BTreeMap<TableName, MainTable>,
    stores: Vec<Arc<SideStore>>,
}

pub fn open_dataset(manifest: &Path) -> Result<DatasetHandle> {
    DatasetHandle::open_with(manifest, OpenOptions::default())
}

impl DatasetHandle {
    pub fn open_with(manifest: &Path, options: OpenOptions) -> Result<Self> {
        let schema = DatasetSchema::load(manifest)?.validated()?;
        let root = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
        let layout = TableLayout::new(&schema);

        let mut stores = Vec::with_capacity(schema.mappings.len());
        for m in &schema.mappings {
            stores.push(Arc::new(SideStore::load(&m.column, &root.join(&m.file), m.regular)?));
        }
        for bound in layout.features.iter().chain(&layout.labels) {
            if let Binding::Mapped { mapping, .. } = bound.binding {
                let store = &stores[mapping];
                if let (true, Some(len)) = (store.regular, store.block_len()) {
                    if !bound.sub.dimension.admits(len) {
                        return Err(Error::SchemaMismatch {
                            table: store.path.display().to_string(),
                            row: None,
                            message: format!(
                                "blocks have length {len}, sub-feature `{}` declares {}",
                                bound.sub.name, bound.sub.dimension
                            ),
                        });
                    }
                }
            }
        }

        let mut tables = BTreeMap::new();
        for (&name, rel) in &schema.tables {
            tables.insert(name, MainTable::open(name, &root.join(rel), &layout)?);
        }

        let mut handle = DatasetHandle {
            root,
            schema: Arc::new(schema),
            layout: Arc::new(layout),
            tables,
            stores,
        };
        if options.verify {
            handle.verify(options.verify_batch)?;
        }
        Ok(handle)
    }

    fn verify(&mut self, batch: usize) -> Result<()> {
        let names: Vec<TableName> = self.tables.keys().copied().collect();
        for name in names {
            let mut rows = 0u64;
            for slice in self.stream_slices(name, batch)? {
                let slice = slice?;
                for (idx, col) in self.layout.columns.iter().enumerate() {
                    if let (ColumnRole::Id { mapping }, ColumnData::Ids(ids)) = (col.role, slice.column_at(idx)) {
                        let store = &self.stores[mapping];
                        if let Some(bad) = ids.iter().find(|id| !store.contains(id)) {
                            return Err(Error::DanglingReference {
                                store: store.column.clone(),
                                id: bad.clone(),
                            });
                        }
                    }
                }
                rows += slice.len() as u64;
            }
            if let Some(t) = self.tables.get_mut(&name) {
                t.row_count = Some(rows);
            }
        }
        Ok(())
    }

    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    pub fn schema_arc(&self) -> Arc<DatasetSchema> {
        self.schema.clone()
    }

    pub fn layout(&self) -> &TableLayout {
        &self.layout
    }

    pub fn table_names(&self) -> Vec<TableName> {
        self.tables.keys().copied().collect()
    }

    pub fn has_table(&self, name: TableName) -> bool {
        self.tables.contains_key(&name)
    }

    pub fn table(&self, name: TableName) -> Option<&MainTable> {
        self.tables.get(&name)
    }

    /// Row count recorded by the open-time scan, if one ran.
    pub fn row_count(&self, name: TableName) -> Option<u64> {
        self.tables.get(&name).and_then(|t| t.row_count)
    }

    pub fn store(&self, mapping: usize) -> &SideStore {
        &self.stores[mapping]
    }

    pub fn store_for(&self, column: &str) -> Option<&SideStore> {
        self.stores.iter().map(Arc::as_ref).find(|s| s.column == column)
    }

    pub fn stream_slices(&self, table: TableName, batch_size: usize) -> Result<SliceIter> {
        let t = self
            .tables
            .get(&table)
            .ok_or_else(|| Error::Config(format!("dataset `{}` has no {table} table", self.schema.name)))?;
        SliceIter::new(t, self.schema.clone(), self.layout.clone(), batch_size)
    }

    fn bound(&self, group: Group) -> &[BoundSubFeature] {
        match group {
            Group::Features => &self.layout.features,
            Group::Labels => &self.layout.labels,
        }
    }

    fn check_raw(&self, slice: &DataFrameSlice) -> Result<()> {
        if slice.names().len() != self.layout.columns.len() {
            return Err(Error::Config("slice is not a raw table slice of this dataset".into()));
        }
        Ok(())
    }

    /// Max-width numeric columns of a raw slice. Positions beyond a
    /// variable-length value are NaN; source values must be finite.
    pub fn decode_group(&self, slice: &DataFrameSlice, group: Group) -> Result<Vec<Vec<f64>>> {
        self.check_raw(slice)?;
        let n = slice.len();
        let bound = self.bound(group);
        let width: usize = bound.iter().map(|b| b.sub.dimension.max()).sum();
        let mut out = vec![Vec::with_capacity(n); width];
        for b in bound {
            if !b.sub.value_class.is_numeric() {
                return Err(Error::UnsupportedFeature(b.sub.name.clone()));
            }
            match &b.binding {
                Binding::Inline { columns } => {
                    for (k, &col) in columns.iter().enumerate() {
                        let ColumnData::Numeric(values) = slice.column_at(col) else {
                            unreachable!("inline columns are numeric")
                        };
                        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                            return Err(non_finite(&self.layout.columns[col].name, *bad));
                        }
                        out[b.offset + k].extend_from_slice(values);
                    }
                }
                Binding::Mapped { column, mapping } => {
                    let ColumnData::Ids(ids) = slice.column_at(*column) else {
                        unreachable!("mapping columns hold identifiers")
                    };
                    let store = &self.stores[*mapping];
                    let dmax = b.sub.dimension.max();
                    for id in ids {
                        let values = numeric_block(store.get(id)?, &b.sub.name)?;
                        check_len(b, values.len())?;
                        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                            return Err(non_finite(&b.sub.name, *bad));
                        }
                        for k in 0..dmax {
                            out[b.offset + k].push(values.get(k).copied().unwrap_or(f64::NAN));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Values of one row keyed by sub-feature; token sub-features are skipped.
    pub fn decode_point(&self, slice: &DataFrameSlice, row: usize) -> Result<Point> {
        self.check_raw(slice)?;
        let mut point = Point::default();
        for (group, into) in [(Group::Features, &mut point.features), (Group::Labels, &mut point.labels)] {
            for b in self.bound(group) {
                if !b.sub.value_class.is_numeric() {
                    continue;
                }
                let values = match &b.binding {
                    Binding::Inline { columns } => columns
                        .iter()
                        .map(|&c| match slice.column_at(c) {
                            ColumnData::Numeric(v) => v[row],
                            _ => unreachable!("inline columns are numeric"),
                        })
                        .collect(),
                    Binding::Mapped { .. } => {
                        let v = numeric_block(self.block(slice, row, &b.sub.name)?, &b.sub.name)?;
                        check_len(b, v.len())?;
                        v.to_vec()
                    }
                };
                into.insert(b.sub.name.clone(), values);
            }
        }
        Ok(point)
    }

    /// Side-store block behind a mapped sub-feature for one row.
    pub fn block(&self, slice: &DataFrameSlice, row: usize, sub_feature: &str) -> Result<&ValueBlock> {
        self.check_raw(slice)?;
        let b = self
            .layout
            .features
            .iter()
            .chain(&self.layout.labels)
            .find(|b| b.sub.name == sub_feature)
            .ok_or_else(|| Error::Config(format!("unknown sub-feature `{sub_feature}`")))?;
        match &b.binding {
            Binding::Mapped { column, mapping } => match slice.column_at(*column) {
                ColumnData::Ids(ids) => Ok(self.stores[*mapping].get(&ids[row])?.as_ref()),
                _ => unreachable!("mapping columns hold identifiers"),
            },
            Binding::Inline { .. } => Err(Error::Config(format!(
                "sub-feature `{sub_feature}` is stored inline, not in a side store"
            ))),
        }
    }

    pub fn sub_feature_class(&self, name: &str) -> Option<ValueClass> {
        self.layout
            .features
            .iter()
            .chain(&self.layout.labels)
            .find(|b| b.sub.name == name)
            .map(|b| b.sub.value_class)
    }
}

fn numeric_block<'a>(block: &'a ValueBlock, name: &str) -> Result<&'a [f64]> {
    block.as_numeric().ok_or_else(|| Error::UnsupportedFeature(name.to_string()))
}

fn check_len(b: &BoundSubFeature, len: usize) -> Result<()> {
    if b.sub.dimension.admits(len) {
        Ok(())
    } else {
        Err(Error::Shape {
            sub_feature: b.sub.name.clone(),
            message: format!("block length {len} outside declared dimension {}", b.sub.dimension),
        })
    }
}

fn non_finite(column: &str, v: f64) -> Error {
    Error::InvalidValue {
        column: column.to_string(),
        message: format!("non-finite value {v}"),
    }
}
