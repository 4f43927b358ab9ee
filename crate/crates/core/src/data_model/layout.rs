use std::collections::HashMap;

use crate::data_model::schema::{ComponentKind, DatasetSchema, SubFeature};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRole {
    Numeric,
    /// Opaque identifier resolved through the mapping with this index.
    Id { mapping: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnDef {
    pub name: String,
    pub role: ColumnRole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Inline { columns: Vec<usize> },
    Mapped { column: usize, mapping: usize },
}

/// A sub-feature together with where its values live.
#[derive(Debug, Clone)]
pub struct BoundSubFeature {
    pub kind: ComponentKind,
    pub sub: SubFeature,
    pub binding: Binding,
    /// Offset of this sub-feature in the max-width flattened vector.
    pub offset: usize,
}

/// Main-table column layout derived from a valid schema.
#[derive(Debug, Clone)]
pub struct TableLayout {
    pub columns: Vec<ColumnDef>,
    index: HashMap<String, usize>,
    pub features: Vec<BoundSubFeature>,
    pub labels: Vec<BoundSubFeature>,
    pub time_coords: Vec<usize>,
    pub space_coords: Vec<usize>,
}

impl TableLayout {
    /// Canonical column order: coordinate-only columns, then feature columns
    /// in flatten order, then label columns.
    pub fn new(schema: &DatasetSchema) -> Self {
        let mut produced: Vec<String> = Vec::new();
        for comps in [&schema.features, &schema.labels] {
            for (_, sub) in DatasetSchema::ordered_sub_features(comps) {
                match &sub.source {
                    Some(src) => produced.push(src.clone()),
                    None => produced.extend(sub.inline_columns()),
                }
            }
        }

        let mut columns = Vec::new();
        let mut index = HashMap::new();
        let mut add = |name: &str, role: ColumnRole, columns: &mut Vec<ColumnDef>| -> usize {
            *index.entry(name.to_string()).or_insert_with(|| {
                columns.push(ColumnDef {
                    name: name.to_string(),
                    role,
                });
                columns.len() - 1
            })
        };

        let mapping_role = |name: &str| {
            schema
                .mappings
                .iter()
                .position(|m| m.column == name)
                .map(|mapping| ColumnRole::Id { mapping })
                .unwrap_or(ColumnRole::Numeric)
        };

        for c in schema.coordinates.time.iter().chain(&schema.coordinates.space) {
            if !produced.contains(c) {
                add(c, mapping_role(c), &mut columns);
            }
        }

        let mut bind = |comps, columns: &mut Vec<ColumnDef>| {
            let mut out = Vec::new();
            let mut offset = 0;
            for (kind, sub) in DatasetSchema::ordered_sub_features(comps) {
                let binding = match &sub.source {
                    Some(src) => {
                        let mapping = schema
                            .mappings
                            .iter()
                            .position(|m| &m.column == src)
                            .expect("validated schema: source refers to a mapping");
                        let column = add(src, ColumnRole::Id { mapping }, columns);
                        Binding::Mapped { column, mapping }
                    }
                    None => Binding::Inline {
                        columns: sub
                            .inline_columns()
                            .iter()
                            .map(|c| add(c, ColumnRole::Numeric, columns))
                            .collect(),
                    },
                };
                out.push(BoundSubFeature {
                    kind,
                    sub: sub.clone(),
                    binding,
                    offset,
                });
                offset += sub.dimension.max();
            }
            out
        };
        let features = bind(&schema.features, &mut columns);
        let labels = bind(&schema.labels, &mut columns);

        let lookup = |c: &String| index[c.as_str()];
        let time_coords = schema.coordinates.time.iter().map(lookup).collect();
        let space_coords = schema.coordinates.space.iter().map(lookup).collect();

        TableLayout {
            columns,
            index,
            features,
            labels,
            time_coords,
            space_coords,
        }
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn feature_width(&self) -> usize {
        self.features.iter().map(|b| b.sub.dimension.max()).sum()
    }

    pub fn label_width(&self) -> usize {
        self.labels.iter().map(|b| b.sub.dimension.max()).sum()
    }

    /// Names of the max-width flattened feature positions, used as score columns.
    pub fn feature_column_names(&self) -> Vec<String> {
        flat_names(&self.features)
    }

    pub fn label_column_names(&self) -> Vec<String> {
        flat_names(&self.labels)
    }
}

fn flat_names(subs: &[BoundSubFeature]) -> Vec<String> {
    subs.iter()
        .flat_map(|b| {
            let d = b.sub.dimension;
            if d.is_fixed() && d.max() == 1 {
                vec![b.sub.name.clone()]
            } else {
                (0..d.max()).map(|i| format!("{}_{i}", b.sub.name)).collect()
            }
        })
        .collect()
}
