//! Two-file storage: rectangular CSV main tables with one data point per row,
//! plus side stores holding mapping targets (CSV when regular, JSON when
//! irregular). Main tables are streamed in bounded-size slices.

pub mod dataset;
pub mod side;
pub mod slice;
pub mod table;
pub mod writer;

pub use dataset::{open_dataset, DatasetHandle, Group, OpenOptions};
pub use side::{SideStore, Token, ValueBlock};
pub use slice::{resolve_mapping, Cell, ColumnData, DataFrameSlice, MappingCursor, ResolveMode, Resolved};
pub use table::{format_number, MainTable, SliceIter, TableWriter};
pub use writer::{write_dataset, write_manifest, InMemoryDataset, MANIFEST_FILE};
