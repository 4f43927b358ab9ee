use std::collections::BTreeMap;

use crate::data_model::schema::{Component, DatasetSchema};
use crate::error::{Error, Result};

/// Coordinate of a data point in (virtual) time and space.
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinate {
    pub time: Vec<f64>,
    pub space: Vec<f64>,
}

impl Coordinate {
    pub fn new(time: Vec<f64>, space: Vec<f64>) -> Result<Self> {
        if time.is_empty() && space.is_empty() {
            return Err(Error::Domain("coordinate needs a time or space component".into()));
        }
        if time.iter().chain(&space).any(|v| !v.is_finite()) {
            return Err(Error::Domain("coordinate components must be finite".into()));
        }
        Ok(Coordinate { time, space })
    }
}

/// Values of one data point, keyed by sub-feature name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Point {
    pub features: BTreeMap<String, Vec<f64>>,
    pub labels: BTreeMap<String, Vec<f64>>,
}

impl Point {
    pub fn feature(mut self, name: &str, values: Vec<f64>) -> Self {
        self.features.insert(name.to_string(), values);
        self
    }

    pub fn label(mut self, name: &str, values: Vec<f64>) -> Self {
        self.labels.insert(name.to_string(), values);
        self
    }
}

/// Concatenated vectors; `*_lengths` hold one entry per sub-feature in
/// flatten order so variable-length values stay unambiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Flattened {
    pub features: Vec<f64>,
    pub feature_lengths: Vec<usize>,
    pub labels: Option<Vec<f64>>,
    pub label_lengths: Vec<usize>,
}

/// Concatenates a point as time -> space -> space-time, sub-features in
/// declared order.
pub fn flatten_point(point: &Point, schema: &DatasetSchema) -> Result<Flattened> {
    let (features, feature_lengths) = flatten_group(&point.features, &schema.features)?;
    let (labels, label_lengths) = if schema.labels.is_empty() {
        if let Some(name) = point.labels.keys().next() {
            return Err(shape(name, "schema declares no labels"));
        }
        (None, Vec::new())
    } else {
        let (l, n) = flatten_group(&point.labels, &schema.labels)?;
        (Some(l), n)
    };
    Ok(Flattened {
        features,
        feature_lengths,
        labels,
        label_lengths,
    })
}

/// Inverse of [`flatten_point`].
pub fn unflatten(flat: &Flattened, schema: &DatasetSchema) -> Result<Point> {
    let mut point = Point::default();
    split_group(&flat.features, &flat.feature_lengths, &schema.features, &mut point.features)?;
    if let Some(labels) = &flat.labels {
        split_group(labels, &flat.label_lengths, &schema.labels, &mut point.labels)?;
    }
    Ok(point)
}

fn flatten_group(values: &BTreeMap<String, Vec<f64>>, comps: &[Component]) -> Result<(Vec<f64>, Vec<usize>)> {
    let ordered = DatasetSchema::ordered_sub_features(comps);
    if let Some(unknown) = values
        .keys()
        .find(|k| !ordered.iter().any(|(_, s)| &s.name == *k))
    {
        return Err(shape(unknown, "not declared in schema"));
    }
    let mut out = Vec::new();
    let mut lengths = Vec::with_capacity(ordered.len());
    for (_, sub) in ordered {
        let v = values
            .get(&sub.name)
            .ok_or_else(|| shape(&sub.name, "missing from point"))?;
        if !sub.dimension.admits(v.len()) {
            return Err(shape(
                &sub.name,
                &format!("length {} does not match declared dimension {}", v.len(), sub.dimension),
            ));
        }
        out.extend_from_slice(v);
        lengths.push(v.len());
    }
    Ok((out, lengths))
}

fn split_group(
    flat: &[f64],
    lengths: &[usize],
    comps: &[Component],
    into: &mut BTreeMap<String, Vec<f64>>,
) -> Result<()> {
    let ordered = DatasetSchema::ordered_sub_features(comps);
    if ordered.len() != lengths.len() || lengths.iter().sum::<usize>() != flat.len() {
        return Err(shape("<all>", "length table does not match flattened vector"));
    }
    let mut at = 0;
    for ((_, sub), &len) in ordered.iter().zip(lengths) {
        into.insert(sub.name.clone(), flat[at..at + len].to_vec());
        at += len;
    }
    Ok(())
}

fn shape(sub: &str, message: &str) -> Error {
    Error::Shape {
        sub_feature: sub.to_string(),
        message: message.to_string(),
    }
}
