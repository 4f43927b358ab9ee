//! Dataset schema manifests.
//!
//! A manifest is a TOML document describing every column of a dataset by
//! role. Example:
//!
//! ```toml
//! name = "buildings-toy"
//!
//! [shares]
//! train = 0.56
//! val = 0.09
//! test = 0.35
//!
//! [coordinates]
//! time = ["year", "month", "day", "hour"]
//! space = ["building_id"]
//!
//! [tables]
//! train = "train.csv"
//! val = "val.csv"
//! test = "test.csv"
//!
//! [[mappings]]
//! column = "building_id"
//! file = "buildings.csv"
//! regular = true
//!
//! [[features]]
//! kind = "time"
//! sub_features = [
//!     { name = "year", dimension = 1, value_class = "ordinal" },
//! ]
//!
//! [[features]]
//! kind = "space"
//! sub_features = [{ name = "image", dimension = 300, source = "building_id" }]
//!
//! [[labels]]
//! kind = "space_time"
//! sub_features = [{ name = "load", dimension = 96 }]
//! ```
//!
//! Inline sub-features of dimension 1 occupy one column named after the
//! sub-feature; wider ones occupy `name_0 .. name_{D-1}`. Sub-features with a
//! `source` take their values from the side store of that mapping column.
//! Coordinate columns that are not already feature, label or mapping columns
//! become extra numeric columns of the main table.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SHARE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Time,
    Space,
    SpaceTime,
}

impl ComponentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Time => "time",
            ComponentKind::Space => "space",
            ComponentKind::SpaceTime => "space_time",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueClass {
    #[default]
    Numeric,
    Ordinal,
    OneHot,
    Tokens,
}

impl ValueClass {
    pub fn is_numeric(self) -> bool {
        !matches!(self, ValueClass::Tokens)
    }
}

/// Fixed length, or a declared `[min, max]` range for variable-length values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dimension {
    Fixed(usize),
    Range { min: usize, max: usize },
}

impl Dimension {
    pub fn max(self) -> usize {
        match self {
            Dimension::Fixed(d) => d,
            Dimension::Range { max, .. } => max,
        }
    }

    pub fn min(self) -> usize {
        match self {
            Dimension::Fixed(d) => d,
            Dimension::Range { min, .. } => min,
        }
    }

    pub fn is_fixed(self) -> bool {
        matches!(self, Dimension::Fixed(_))
    }

    pub fn admits(self, len: usize) -> bool {
        match self {
            Dimension::Fixed(d) => len == d,
            Dimension::Range { min, max } => (min..=max).contains(&len),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Fixed(d) => write!(f, "{d}"),
            Dimension::Range { min, max } => write!(f, "{min}-{max}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubFeature {
    pub name: String,
    pub dimension: Dimension,
    #[serde(default)]
    pub value_class: ValueClass,
    /// Sub-sub-feature dimensions; must sum to the fixed dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nested: Option<Vec<usize>>,
    /// Mapping column whose side store holds this sub-feature's values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl SubFeature {
    pub fn inline(name: impl Into<String>, dimension: usize) -> Self {
        SubFeature {
            name: name.into(),
            dimension: Dimension::Fixed(dimension),
            value_class: ValueClass::Numeric,
            nested: None,
            source: None,
        }
    }

    pub fn mapped(name: impl Into<String>, dimension: Dimension, source: impl Into<String>) -> Self {
        SubFeature {
            name: name.into(),
            dimension,
            value_class: ValueClass::Numeric,
            nested: None,
            source: Some(source.into()),
        }
    }

    pub fn with_class(mut self, class: ValueClass) -> Self {
        self.value_class = class;
        self
    }

    /// Main-table column names of an inline sub-feature.
    pub fn inline_columns(&self) -> Vec<String> {
        match self.dimension {
            Dimension::Fixed(1) => vec![self.name.clone()],
            d => (0..d.max()).map(|i| format!("{}_{i}", self.name)).collect(),
        }
    }
}

/// A feature or label component (time-, space- or space-time-variant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub sub_features: Vec<SubFeature>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoordinateSpec {
    #[serde(default)]
    pub time: Vec<String>,
    #[serde(default)]
    pub space: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingRef {
    pub column: String,
    pub file: String,
    /// Regular stores are tabular with uniform block length; irregular ones
    /// are JSON objects.
    pub regular: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitShares {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitShares {
    pub fn new(train: f64, val: f64, test: f64) -> Self {
        SplitShares { train, val, test }
    }

    pub fn sum(&self) -> f64 {
        self.train + self.val + self.test
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableName {
    /// Unsplit data, the input of the splitter.
    Pool,
    Train,
    Val,
    Test,
}

impl TableName {
    pub const ALL: [TableName; 4] = [TableName::Pool, TableName::Train, TableName::Val, TableName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            TableName::Pool => "pool",
            TableName::Train => "train",
            TableName::Val => "val",
            TableName::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<TableName> {
        TableName::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for TableName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub name: String,
    pub shares: SplitShares,
    #[serde(default)]
    pub coordinates: CoordinateSpec,
    #[serde(default)]
    pub tables: BTreeMap<TableName, String>,
    #[serde(default)]
    pub mappings: Vec<MappingRef>,
    #[serde(default)]
    pub features: Vec<Component>,
    #[serde(default)]
    pub labels: Vec<Component>,
}

/// One failed schema invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl DatasetSchema {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|span| line_col(text, span.start))
                .unwrap_or((0, 0));
            Error::Parse {
                path: origin.to_string(),
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::NotFound(path.to_path_buf())
            } else {
                Error::io(path.display().to_string(), e)
            }
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize schema: {e}")))
    }

    pub fn mapping(&self, column: &str) -> Option<&MappingRef> {
        self.mappings.iter().find(|m| m.column == column)
    }

    /// Sub-features in flatten order: time, space, space-time; declared order
    /// within a component.
    pub fn ordered_sub_features(components: &[Component]) -> Vec<(ComponentKind, &SubFeature)> {
        let mut comps: Vec<&Component> = components.iter().collect();
        comps.sort_by_key(|c| c.kind);
        comps
            .into_iter()
            .flat_map(|c| c.sub_features.iter().map(move |s| (c.kind, s)))
            .collect()
    }

    /// Largest flattened feature dimension.
    pub fn feature_dim_max(&self) -> usize {
        self.features
            .iter()
            .flat_map(|c| &c.sub_features)
            .map(|s| s.dimension.max())
            .sum()
    }

    pub fn feature_dim_min(&self) -> usize {
        self.features
            .iter()
            .flat_map(|c| &c.sub_features)
            .map(|s| s.dimension.min())
            .sum()
    }

    pub fn label_dim_max(&self) -> usize {
        self.labels
            .iter()
            .flat_map(|c| &c.sub_features)
            .map(|s| s.dimension.max())
            .sum()
    }

    pub fn label_dim_min(&self) -> usize {
        self.labels
            .iter()
            .flat_map(|c| &c.sub_features)
            .map(|s| s.dimension.min())
            .sum()
    }

    pub fn has_variable_labels(&self) -> bool {
        self.labels
            .iter()
            .flat_map(|c| &c.sub_features)
            .any(|s| !s.dimension.is_fixed())
    }

    /// Checks every schema invariant. An empty result means the schema is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: &str, message: String| {
            out.push(Violation {
                field: field.to_string(),
                message,
            })
        };

        if self.name.trim().is_empty() {
            push("name", "dataset name is empty".into());
        }

        let s = self.shares;
        for (label, v) in [("train", s.train), ("val", s.val), ("test", s.test)] {
            if !(0.0..=1.0).contains(&v) {
                push(&format!("shares.{label}"), format!("share {v} outside [0, 1]"));
            }
        }
        if (s.sum() - 1.0).abs() > SHARE_TOLERANCE {
            push("shares", format!("split shares sum to {}", s.sum()));
        }

        if self.features.is_empty() {
            push("features", "at least one feature component required".into());
        }
        if self.tables.is_empty() {
            push("tables", "at least one main table required".into());
        }

        let mut mapping_cols = HashSet::new();
        for (i, m) in self.mappings.iter().enumerate() {
            if !mapping_cols.insert(m.column.as_str()) {
                push(
                    &format!("mappings[{i}].column"),
                    format!("mapping column `{}` declared more than once", m.column),
                );
            }
            if m.file.trim().is_empty() {
                push(&format!("mappings[{i}].file"), "empty side file path".into());
            }
        }

        // Column ownership: every main-table column must be produced exactly once.
        let mut columns: HashMap<String, String> = HashMap::new();
        let mut sub_names: HashSet<&str> = HashSet::new();
        let mut source_uses: HashMap<&str, usize> = HashMap::new();

        for (group, comps) in [("features", &self.features), ("labels", &self.labels)] {
            let mut kinds = HashSet::new();
            for (ci, comp) in comps.iter().enumerate() {
                let field = format!("{group}[{ci}]");
                if !kinds.insert(comp.kind) {
                    push(
                        &format!("{field}.kind"),
                        format!("more than one {} component in {group}", comp.kind.as_str()),
                    );
                }
                if comp.sub_features.is_empty() {
                    push(&format!("{field}.sub_features"), "component has no sub-features".into());
                }
                for (si, sub) in comp.sub_features.iter().enumerate() {
                    let sf = format!("{field}.sub_features[{si}]");
                    if sub.name.trim().is_empty() {
                        push(&format!("{sf}.name"), "empty sub-feature name".into());
                    }
                    if !sub_names.insert(sub.name.as_str()) {
                        push(
                            &format!("{sf}.name"),
                            format!("sub-feature name `{}` used more than once", sub.name),
                        );
                    }
                    match sub.dimension {
                        Dimension::Fixed(0) => {
                            push(&format!("{sf}.dimension"), "dimension must be a positive integer".into())
                        }
                        Dimension::Range { min, max } if min == 0 || min > max => push(
                            &format!("{sf}.dimension"),
                            format!("invalid dimension range [{min}, {max}]"),
                        ),
                        _ => {}
                    }
                    if let Some(nested) = &sub.nested {
                        match sub.dimension {
                            Dimension::Fixed(d) => {
                                if nested.contains(&0) {
                                    push(&format!("{sf}.nested"), "nested dimensions must be positive".into());
                                }
                                let total: usize = nested.iter().sum();
                                if total != d {
                                    push(
                                        &format!("{sf}.nested"),
                                        format!("nested dimensions sum to {total}, expected {d}"),
                                    );
                                }
                            }
                            Dimension::Range { .. } => push(
                                &format!("{sf}.nested"),
                                "nested dimensions require a fixed dimension".into(),
                            ),
                        }
                    }
                    match &sub.source {
                        Some(src) => {
                            *source_uses.entry(src.as_str()).or_default() += 1;
                            match self.mapping(src) {
                                None => push(
                                    &format!("{sf}.source"),
                                    format!("source `{src}` is not a declared mapping column"),
                                ),
                                Some(m) => {
                                    if m.regular && !sub.dimension.is_fixed() {
                                        push(
                                            &format!("{sf}.source"),
                                            "variable-length sub-features need an irregular side store".into(),
                                        );
                                    }
                                    if m.regular && sub.value_class == ValueClass::Tokens {
                                        push(
                                            &format!("{sf}.source"),
                                            "token sequences need an irregular side store".into(),
                                        );
                                    }
                                }
                            }
                        }
                        None => {
                            if !sub.dimension.is_fixed() {
                                push(
                                    &format!("{sf}.dimension"),
                                    "variable-length sub-features must be stored in an irregular side store".into(),
                                );
                            }
                            if sub.value_class == ValueClass::Tokens {
                                push(
                                    &format!("{sf}.value_class"),
                                    "token sequences must be stored in an irregular side store".into(),
                                );
                            }
                            if sub.dimension.max() > 0 {
                                for col in sub.inline_columns() {
                                    if let Some(prev) = columns.insert(col.clone(), sf.clone()) {
                                        push(&sf, format!("column `{col}` already produced by {prev}"));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }

        for (i, m) in self.mappings.iter().enumerate() {
            match source_uses.get(m.column.as_str()) {
                None => push(
                    &format!("mappings[{i}]"),
                    format!("mapping column `{}` is not the source of any sub-feature", m.column),
                ),
                Some(&n) if n > 1 => push(
                    &format!("mappings[{i}]"),
                    format!("mapping column `{}` is the source of {n} sub-features", m.column),
                ),
                _ => {}
            }
            if let Some(prev) = columns.insert(m.column.clone(), format!("mappings[{i}]")) {
                push(
                    &format!("mappings[{i}].column"),
                    format!("column `{}` already produced by {prev}", m.column),
                );
            }
        }

        let coords = &self.coordinates;
        if coords.time.is_empty() && coords.space.is_empty() {
            push("coordinates", "at least one time or space coordinate column required".into());
        }
        let mut seen = HashSet::new();
        for (axis, cols) in [("time", &coords.time), ("space", &coords.space)] {
            for (i, c) in cols.iter().enumerate() {
                if !seen.insert(c.as_str()) {
                    push(
                        &format!("coordinates.{axis}[{i}]"),
                        format!("coordinate column `{c}` listed more than once"),
                    );
                }
                if axis == "time" && mapping_cols.contains(c.as_str()) {
                    push(
                        &format!("coordinates.time[{i}]"),
                        format!("time coordinate `{c}` must be numeric, not a mapping identifier"),
                    );
                }
            }
        }

        out
    }

    /// Returns the schema unchanged if valid, otherwise all violations.
    pub fn validated(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidSchema(v))
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, column)
}
