use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::data_model::{ColumnRole, DatasetSchema, TableLayout, TableName};
use crate::error::{Error, Result};
use crate::storage::side::csv_error;
use crate::storage::slice::{Cell, ColumnData, DataFrameSlice};

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

pub(crate) fn parse_number(cell: &str, origin: &str, line: usize, column: usize) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: origin.to_string(),
        line,
        column,
        message: format!("malformed numeric cell `{cell}`"),
    })
}

/// Main table of one split.
#[derive(Debug, Clone)]
pub struct MainTable {
    pub name: TableName,
    pub path: PathBuf,
    /// For every file column, its index in the layout.
    pub(crate) file_to_layout: Vec<usize>,
    pub row_count: Option<u64>,
}

impl MainTable {
    /// Reads the header row and matches it against the layout.
    pub fn open(name: TableName, path: &Path, layout: &TableLayout) -> Result<Self> {
        if !path.exists() {
            return Err(Error::NotFound(path.to_path_buf()));
        }
        let origin = path.display().to_string();
        let file = File::open(path).map_err(|e| Error::io(&origin, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(BufReader::new(file));
        let header = reader.headers().map_err(|e| csv_error(&origin, e))?.clone();
        let mismatch = |message: String| Error::SchemaMismatch {
            table: origin.clone(),
            row: None,
            message,
        };
        let mut file_to_layout = Vec::with_capacity(header.len());
        let mut seen = vec![false; layout.columns.len()];
        for name in header.iter() {
            let idx = layout
                .position(name)
                .ok_or_else(|| mismatch(format!("unexpected column `{name}`")))?;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(mismatch(format!("duplicate column `{name}`")));
            }
            file_to_layout.push(idx);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(mismatch(format!("missing column `{}`", layout.columns[missing].name)));
        }
        Ok(MainTable {
            name,
            path: path.to_path_buf(),
            file_to_layout,
            row_count: None,
        })
    }
}

/// Streaming iterator over fixed-size slices of a main table.
pub struct SliceIter {
    reader: csv::Reader<BufReader<File>>,
    record: csv::StringRecord,
    origin: String,
    table: TableName,
    schema: Arc<DatasetSchema>,
    layout: Arc<TableLayout>,
    file_to_layout: Vec<usize>,
    batch_size: usize,
    next_row: u64,
    done: bool,
}

impl SliceIter {
    pub(crate) fn new(
        table: &MainTable,
        schema: Arc<DatasetSchema>,
        layout: Arc<TableLayout>,
        batch_size: usize,
    ) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        let origin = table.path.display().to_string();
        let file = File::open(&table.path).map_err(|e| Error::io(&origin, e))?;
        let reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(BufReader::new(file));
        Ok(SliceIter {
            reader,
            record: csv::StringRecord::new(),
            origin,
            table: table.name,
            schema,
            layout,
            file_to_layout: table.file_to_layout.clone(),
            batch_size,
            next_row: 0,
            done: false,
        })
    }

    fn read_batch(&mut self) -> Result<Option<DataFrameSlice>> {
        let layout = &self.layout;
        let mut columns: Vec<ColumnData> = layout
            .columns
            .iter()
            .map(|c| match c.role {
                ColumnRole::Numeric => ColumnData::Numeric(Vec::with_capacity(self.batch_size)),
                ColumnRole::Id { .. } => ColumnData::Ids(Vec::with_capacity(self.batch_size)),
            })
            .collect();
        let start_row = self.next_row;
        let mut rows = 0;
        while rows < self.batch_size {
            let more = self
                .reader
                .read_record(&mut self.record)
                .map_err(|e| csv_error(&self.origin, e))?;
            if !more {
                self.done = true;
                break;
            }
            let row = self.next_row;
            if self.record.len() != self.file_to_layout.len() {
                return Err(Error::SchemaMismatch {
                    table: self.origin.clone(),
                    row: Some(row),
                    message: format!(
                        "row has {} cells, expected {}",
                        self.record.len(),
                        self.file_to_layout.len()
                    ),
                });
            }
            let line = row as usize + 2;
            for (file_col, cell) in self.record.iter().enumerate() {
                match &mut columns[self.file_to_layout[file_col]] {
                    ColumnData::Numeric(v) => v.push(parse_number(cell, &self.origin, line, file_col + 1)?),
                    ColumnData::Ids(v) => v.push(cell.to_string()),
                    ColumnData::Blocks(_) => unreachable!("raw tables hold no resolved blocks"),
                }
            }
            self.next_row += 1;
            rows += 1;
        }
        if rows == 0 {
            return Ok(None);
        }
        Ok(Some(DataFrameSlice::new(
            self.schema.clone(),
            self.layout.clone(),
            self.table,
            start_row,
            layout.names(),
            columns,
        )))
    }
}

impl Iterator for SliceIter {
    type Item = Result<DataFrameSlice>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_batch() {
            Ok(Some(s)) => Some(Ok(s)),
            Ok(None) => None,
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Buffered writer of a main table in canonical layout order.
pub struct TableWriter {
    writer: csv::Writer<BufWriter<File>>,
    origin: String,
    width: usize,
    row: Vec<String>,
}

impl TableWriter {
    pub fn create(path: &Path, layout: &TableLayout) -> Result<Self> {
        let origin = path.display().to_string();
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        }
        let file = File::create(path).map_err(|e| Error::io(&origin, e))?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        writer
            .write_record(layout.names())
            .map_err(|e| csv_error(&origin, e))?;
        Ok(TableWriter {
            writer,
            origin,
            width: layout.columns.len(),
            row: Vec::new(),
        })
    }

    pub fn write_cells(&mut self, cells: &[Cell]) -> Result<()> {
        if cells.len() != self.width {
            return Err(Error::SchemaMismatch {
                table: self.origin.clone(),
                row: None,
                message: format!("row has {} cells, expected {}", cells.len(), self.width),
            });
        }
        self.row.clear();
        self.row.extend(cells.iter().map(|c| match c {
            Cell::Num(v) => format_number(*v),
            Cell::Id(s) => s.clone(),
        }));
        self.writer
            .write_record(&self.row)
            .map_err(|e| csv_error(&self.origin, e))
    }

    /// Copies one row of a raw (unresolved) slice.
    pub fn write_slice_row(&mut self, slice: &DataFrameSlice, row: usize) -> Result<()> {
        let cells: Vec<Cell> = slice.row_cells(row)?;
        self.write_cells(&cells)
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.origin, e))
    }
}
