//! Unified spatio-temporal representation: schema manifests, column layout,
//! data points and geographic coordinate transforms.

pub mod geo;
pub mod layout;
pub mod point;
pub mod schema;

pub use geo::{polygon_centroid, to_unit_sphere, Polygon};
pub use layout::{Binding, BoundSubFeature, ColumnDef, ColumnRole, TableLayout};
pub use point::{flatten_point, unflatten, Coordinate, Flattened, Point};
pub use schema::{
    Component, ComponentKind, CoordinateSpec, DatasetSchema, Dimension, MappingRef, SplitShares, SubFeature,
    TableName, ValueClass, Violation,
};

/// All schema violations; empty when the schema is valid.
pub fn validate_schema(schema: &DatasetSchema) -> Vec<Violation> {
    schema.validate()
}
