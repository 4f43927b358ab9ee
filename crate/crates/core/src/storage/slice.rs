use std::sync::Arc;

use crate::data_model::{DatasetSchema, TableLayout, TableName};
use crate::error::{Error, Result};
use crate::storage::side::{SideStore, ValueBlock};

/// One cell of a main table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Id(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Ids(Vec<String>),
    /// Eagerly resolved irregular blocks, one per row.
    Blocks(Vec<Arc<ValueBlock>>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Ids(v) => v.len(),
            ColumnData::Blocks(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Columnar batch of rows from one main table.
#[derive(Debug, Clone)]
pub struct DataFrameSlice {
    schema: Arc<DatasetSchema>,
    layout: Arc<TableLayout>,
    pub table: TableName,
    /// Index of the first row within its table.
    pub start_row: u64,
    names: Vec<String>,
    columns: Vec<ColumnData>,
}

impl DataFrameSlice {
    pub(crate) fn new(
        schema: Arc<DatasetSchema>,
        layout: Arc<TableLayout>,
        table: TableName,
        start_row: u64,
        names: Vec<String>,
        columns: Vec<ColumnData>,
    ) -> Self {
        debug_assert_eq!(names.len(), columns.len());
        DataFrameSlice {
            schema,
            layout,
            table,
            start_row,
            names,
            columns,
        }
    }

    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    pub fn layout(&self) -> &TableLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, ColumnData::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[ColumnData] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&ColumnData> {
        self.names.iter().position(|n| n == name).map(|i| &self.columns[i])
    }

    pub fn column_at(&self, idx: usize) -> &ColumnData {
        &self.columns[idx]
    }

    pub fn numeric(&self, name: &str) -> Option<&[f64]> {
        match self.column(name)? {
            ColumnData::Numeric(v) => Some(v),
            _ => None,
        }
    }

    pub fn ids(&self, name: &str) -> Option<&[String]> {
        match self.column(name)? {
            ColumnData::Ids(v) => Some(v),
            _ => None,
        }
    }

    /// Cells of one row; fails on resolved block columns.
    pub fn row_cells(&self, row: usize) -> Result<Vec<Cell>> {
        self.columns
            .iter()
            .zip(&self.names)
            .map(|(c, name)| match c {
                ColumnData::Numeric(v) => Ok(Cell::Num(v[row])),
                ColumnData::Ids(v) => Ok(Cell::Id(v[row].clone())),
                ColumnData::Blocks(_) => Err(Error::Config(format!(
                    "column `{name}` holds resolved blocks and cannot be written as a cell"
                ))),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolveMode {
    Eager,
    Deferred,
}

/// Result of [`resolve_mapping`].
pub enum Resolved<'a> {
    /// Identifier column replaced by its value blocks.
    Eager(DataFrameSlice),
    Deferred(MappingCursor<'a>),
}

/// O(1) lookup of a row's value block without materializing it.
pub struct MappingCursor<'a> {
    ids: &'a [String],
    store: &'a SideStore,
}

impl<'a> MappingCursor<'a> {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, row: usize) -> Result<&'a ValueBlock> {
        self.store.get(&self.ids[row]).map(|b| b.as_ref())
    }
}

/// Replaces an identifier column by the blocks it refers to (eager), or
/// returns a lookup cursor (deferred). Regular stores expand into
/// `{column}_{i}` numeric columns; irregular stores into a block column.
pub fn resolve_mapping<'a>(
    slice: &'a DataFrameSlice,
    column: &str,
    store: &'a SideStore,
    mode: ResolveMode,
) -> Result<Resolved<'a>> {
    let pos = slice
        .names
        .iter()
        .position(|n| n == column)
        .ok_or_else(|| Error::Config(format!("slice has no column `{column}`")))?;
    let ids = match &slice.columns[pos] {
        ColumnData::Ids(ids) => ids,
        _ => return Err(Error::Config(format!("column `{column}` is not a mapping column"))),
    };
    if slice.schema.mapping(column).is_none() {
        return Err(Error::Config(format!("column `{column}` is not declared as a mapping")));
    }
    // dangling identifiers fail in both modes
    if let Some(bad) = ids.iter().find(|id| !store.contains(id)) {
        return Err(Error::DanglingReference {
            store: store.column.clone(),
            id: bad.clone(),
        });
    }
    match mode {
        ResolveMode::Deferred => Ok(Resolved::Deferred(MappingCursor { ids, store })),
        ResolveMode::Eager => {
            let blocks: Vec<Arc<ValueBlock>> = ids
                .iter()
                .map(|id| store.get(id).cloned())
                .collect::<Result<_>>()?;
            let mut names = slice.names[..pos].to_vec();
            let mut columns = slice.columns[..pos].to_vec();
            if store.regular {
                let width = store.block_len().unwrap_or(0);
                for i in 0..width {
                    names.push(format!("{column}_{i}"));
                    columns.push(ColumnData::Numeric(
                        blocks
                            .iter()
                            .map(|b| b.as_numeric().map(|v| v[i]).unwrap_or(f64::NAN))
                            .collect(),
                    ));
                }
            } else {
                names.push(column.to_string());
                columns.push(ColumnData::Blocks(blocks));
            }
            names.extend_from_slice(&slice.names[pos + 1..]);
            columns.extend_from_slice(&slice.columns[pos + 1..]);
            Ok(Resolved::Eager(DataFrameSlice::new(
                slice.schema.clone(),
                slice.layout.clone(),
                slice.table,
                slice.start_row,
                names,
                columns,
            )))
        }
    }
}
