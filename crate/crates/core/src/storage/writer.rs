use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::data_model::{ColumnRole, DatasetSchema, TableLayout, TableName};
use crate::error::{Error, Result};
use crate::storage::side::{SideStore, ValueBlock};
use crate::storage::slice::Cell;
use crate::storage::table::TableWriter;

pub const MANIFEST_FILE: &str = "manifest.toml";

/// Fully materialized dataset, the input of [`write_dataset`].
#[derive(Debug, Clone)]
pub struct InMemoryDataset {
    pub schema: DatasetSchema,
    /// Rows in canonical layout order.
    pub tables: BTreeMap<TableName, Vec<Vec<Cell>>>,
    /// Blocks per mapping column.
    pub stores: BTreeMap<String, BTreeMap<String, ValueBlock>>,
}

/// Writes the manifest, every main table and every side store under
/// `out_dir`; returns the manifest path.
pub fn write_dataset(data: &InMemoryDataset, out_dir: &Path) -> Result<PathBuf> {
    let schema = data.schema.clone().validated()?;
    let layout = TableLayout::new(&schema);
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;

    for (name, rel) in &schema.tables {
        let rows = data.tables.get(name).map(Vec::as_slice).unwrap_or_default();
        let mut w = TableWriter::create(&out_dir.join(rel), &layout)?;
        for (i, row) in rows.iter().enumerate() {
            check_row(&layout, row, *name, i)?;
            w.write_cells(row)?;
        }
        w.finish()?;
    }
    if let Some(extra) = data.tables.keys().find(|k| !schema.tables.contains_key(k)) {
        return Err(Error::Config(format!("rows given for undeclared {extra} table")));
    }

    for m in &schema.mappings {
        let blocks = data.stores.get(&m.column).cloned().unwrap_or_default();
        let store = SideStore::from_blocks(&m.column, out_dir.join(&m.file), m.regular, blocks)?;
        store.write(&store.path)?;
    }

    write_manifest(&schema, out_dir)
}

pub fn write_manifest(schema: &DatasetSchema, out_dir: &Path) -> Result<PathBuf> {
    let path = out_dir.join(MANIFEST_FILE);
    std::fs::write(&path, schema.to_toml_string()?).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(path)
}

fn check_row(layout: &TableLayout, row: &[Cell], table: TableName, index: usize) -> Result<()> {
    let mismatch = |message: String| Error::SchemaMismatch {
        table: table.to_string(),
        row: Some(index as u64),
        message,
    };
    if row.len() != layout.columns.len() {
        return Err(mismatch(format!(
            "row has {} cells, expected {}",
            row.len(),
            layout.columns.len()
        )));
    }
    for (cell, col) in row.iter().zip(&layout.columns) {
        match (cell, col.role) {
            (Cell::Num(_), ColumnRole::Numeric) => {}
            (Cell::Id(_), ColumnRole::Id { .. }) => {}
            _ => return Err(mismatch(format!("cell type does not match column `{}`", col.name))),
        }
    }
    Ok(())
}
