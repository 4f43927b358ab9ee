//! Batch sources feeding the streaming score engine.
//!
//! A batch is columnar; positions a variable-length row does not reach are
//! NaN and skipped by every score. Real values are always finite.

use crate::data_model::TableName;
use crate::error::{Error, Result};
use crate::storage::{DatasetHandle, Group};

#[derive(Debug, Clone, Default)]
pub struct Batch {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<Vec<f64>>,
}

impl Batch {
    pub fn group(&self, group: Group) -> &[Vec<f64>] {
        match group {
            Group::Features => &self.features,
            Group::Labels => &self.labels,
        }
    }

    pub fn rows(&self) -> usize {
        self.features
            .first()
            .or(self.labels.first())
            .map_or(0, Vec::len)
    }
}

/// Re-scannable stream of batches. Every call to `for_each_batch` yields the
/// same rows in the same order.
pub trait BatchSource: Sync {
    fn describe(&self) -> String;

    fn column_names(&self, group: Group) -> Vec<String>;

    /// Streams batches holding the requested groups; other groups are empty.
    fn for_each_batch(&self, groups: &[Group], f: &mut dyn FnMut(&Batch) -> Result<()>) -> Result<()>;
}

/// Columns held in memory, streamed in fixed-size batches.
#[derive(Debug, Clone)]
pub struct InMemorySource {
    pub name: String,
    feature_names: Vec<String>,
    label_names: Vec<String>,
    features: Vec<Vec<f64>>,
    labels: Vec<Vec<f64>>,
    batch_size: usize,
}

impl InMemorySource {
    /// `features[k]` and `labels[m]` are whole columns of equal length.
    pub fn new(name: impl Into<String>, features: Vec<Vec<f64>>, labels: Vec<Vec<f64>>) -> Result<Self> {
        let n = features.first().or(labels.first()).map_or(0, Vec::len);
        if features.iter().chain(&labels).any(|c| c.len() != n) {
            return Err(Error::Shape {
                sub_feature: "<columns>".into(),
                message: "columns have different lengths".into(),
            });
        }
        if let Some((i, _)) = features
            .iter()
            .chain(&labels)
            .enumerate()
            .find(|(_, c)| c.iter().any(|v| v.is_infinite()))
        {
            return Err(Error::InvalidValue {
                column: format!("column {i}"),
                message: "infinite value".into(),
            });
        }
        Ok(InMemorySource {
            name: name.into(),
            feature_names: (0..features.len()).map(|i| format!("x{i}")).collect(),
            label_names: (0..labels.len()).map(|i| format!("y{i}")).collect(),
            features,
            labels,
            batch_size: 4096,
        })
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    pub fn rows(&self) -> usize {
        self.features.first().or(self.labels.first()).map_or(0, Vec::len)
    }
}

impl BatchSource for InMemorySource {
    fn describe(&self) -> String {
        self.name.clone()
    }

    fn column_names(&self, group: Group) -> Vec<String> {
        match group {
            Group::Features => self.feature_names.clone(),
            Group::Labels => self.label_names.clone(),
        }
    }

    fn for_each_batch(&self, groups: &[Group], f: &mut dyn FnMut(&Batch) -> Result<()>) -> Result<()> {
        let n = self.rows();
        let mut start = 0;
        while start < n {
            let end = (start + self.batch_size).min(n);
            let cut = |cols: &[Vec<f64>], g: Group| {
                if groups.contains(&g) {
                    cols.iter().map(|c| c[start..end].to_vec()).collect()
                } else {
                    Vec::new()
                }
            };
            f(&Batch {
                features: cut(&self.features, Group::Features),
                labels: cut(&self.labels, Group::Labels),
            })?;
            start = end;
        }
        Ok(())
    }
}

/// One or more main tables of an open dataset, streamed in order.
#[derive(Debug, Clone)]
pub struct DatasetSource<'a> {
    handle: &'a DatasetHandle,
    tables: Vec<TableName>,
    batch_size: usize,
}

impl<'a> DatasetSource<'a> {
    pub fn new(handle: &'a DatasetHandle, tables: &[TableName], batch_size: usize) -> Result<Self> {
        if tables.is_empty() {
            return Err(Error::Config("no tables selected".into()));
        }
        if let Some(t) = tables.iter().find(|t| !handle.has_table(**t)) {
            return Err(Error::Config(format!("dataset `{}` has no {t} table", handle.schema().name)));
        }
        Ok(DatasetSource {
            handle,
            tables: tables.to_vec(),
            batch_size: batch_size.max(1),
        })
    }

    pub fn tables(&self) -> &[TableName] {
        &self.tables
    }
}

impl BatchSource for DatasetSource<'_> {
    fn describe(&self) -> String {
        self.tables
            .iter()
            .map(|t| t.as_str())
            .collect::<Vec<_>>()
            .join("+")
    }

    fn column_names(&self, group: Group) -> Vec<String> {
        match group {
            Group::Features => self.handle.layout().feature_column_names(),
            Group::Labels => self.handle.layout().label_column_names(),
        }
    }

    fn for_each_batch(&self, groups: &[Group], f: &mut dyn FnMut(&Batch) -> Result<()>) -> Result<()> {
        for &table in &self.tables {
            for slice in self.handle.stream_slices(table, self.batch_size)? {
                let slice = slice?;
                let mut batch = Batch::default();
                if groups.contains(&Group::Features) {
                    batch.features = self.handle.decode_group(&slice, Group::Features)?;
                }
                if groups.contains(&Group::Labels) {
                    batch.labels = self.handle.decode_group(&slice, Group::Labels)?;
                }
                f(&batch)?;
            }
        }
        Ok(())
    }
}
