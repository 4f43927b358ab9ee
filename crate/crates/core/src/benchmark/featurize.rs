//! Fixed-length featurizations of data points. Fixed-length numeric
//! sub-features pass through unchanged; the featurizer decides how token
//! and variable-length sub-features are reduced.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::benchmark::matrix::Matrix;
use crate::data_model::{Binding, BoundSubFeature, TableName, ValueClass};
use crate::error::{Error, Result};
use crate::storage::{ColumnData, DataFrameSlice, DatasetHandle, Group, ValueBlock};

const BATCH: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Featurizer {
    /// Fixed-length numeric features only.
    Flatten,
    /// Token sub-features become word counts over the training vocabulary.
    BagOfWords,
    /// Variable-length numeric sub-features are atom tables of `atom_width`
    /// values per atom, the first being the element id.
    MoleculeAggregate { atom_width: usize },
}

impl Featurizer {
    pub fn id(&self) -> String {
        match self {
            Featurizer::Flatten => "flatten".into(),
            Featurizer::BagOfWords => "bag-of-words".into(),
            Featurizer::MoleculeAggregate { atom_width } => format!("molecule-aggregate({atom_width})"),
        }
    }
}

/// Lexicographically sorted vocabulary.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Vocabulary {
    words: Vec<String>,
}

impl Vocabulary {
    pub fn build<'a>(tokens: impl IntoIterator<Item = &'a str>) -> Vocabulary {
        let set: BTreeSet<&str> = tokens.into_iter().collect();
        Vocabulary {
            words: set.into_iter().map(str::to_string).collect(),
        }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index(&self, word: &str) -> Option<usize> {
        self.words.binary_search_by(|w| w.as_str().cmp(word)).ok()
    }
}

/// Occurrence count of every vocabulary word; unknown tokens are dropped.
pub fn bag_of_words<'a>(tokens: impl IntoIterator<Item = &'a str>, vocab: &Vocabulary) -> Result<Vec<f64>> {
    if vocab.is_empty() {
        return Err(Error::Config("bag of words needs a non-empty vocabulary".into()));
    }
    let mut row = vec![0.0; vocab.len()];
    for t in tokens {
        if let Some(i) = vocab.index(t) {
            row[i] += 1.0;
        }
    }
    Ok(row)
}

/// Element counts over `elements` (sorted element ids), then the mean and
/// population standard deviation of every remaining per-atom property.
pub fn molecule_aggregate(atoms: &[f64], atom_width: usize, elements: &[f64]) -> Result<Vec<f64>> {
    if atom_width == 0 {
        return Err(Error::Config("atom width must be at least 1".into()));
    }
    if atoms.is_empty() {
        return Err(Error::EmptyInput("molecule without atoms".into()));
    }
    if atoms.len() % atom_width != 0 {
        return Err(Error::Shape {
            sub_feature: "atoms".into(),
            message: format!("{} values are not a multiple of atom width {atom_width}", atoms.len()),
        });
    }
    let n = (atoms.len() / atom_width) as f64;
    let props = atom_width - 1;
    let mut counts = vec![0.0; elements.len()];
    let mut mean = vec![0.0; props];
    for atom in atoms.chunks(atom_width) {
        if let Ok(i) = elements.binary_search_by(|e| e.total_cmp(&atom[0])) {
            counts[i] += 1.0;
        }
        mean.iter_mut().zip(&atom[1..]).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; props];
    for atom in atoms.chunks(atom_width) {
        var.iter_mut()
            .zip(&atom[1..])
            .zip(&mean)
            .for_each(|((s, v), m)| *s += (v - m) * (v - m));
    }
    let std = var.into_iter().map(|s| (s / n).sqrt());
    counts.extend(mean);
    counts.extend(std);
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Part {
    Inline { columns: Vec<usize> },
    Block { name: String },
    Words { name: String, vocab: Vocabulary },
    Molecule { name: String, width: usize, elements: Vec<f64> },
}

/// Featurization fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePlan {
    pub featurizer: Featurizer,
    parts: Vec<Part>,
    pub width: usize,
}

/// Featurized split: rectangular, finite matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Featurized {
    pub x: Matrix,
    pub y: Matrix,
    pub featurizer: String,
}

fn block<'h>(handle: &'h DatasetHandle, slice: &DataFrameSlice, row: usize, name: &str) -> Result<&'h ValueBlock> {
    handle.block(slice, row, name)
}

fn for_each_row(
    handle: &DatasetHandle,
    table: TableName,
    mut f: impl FnMut(&DataFrameSlice, usize) -> Result<()>,
) -> Result<()> {
    for slice in handle.stream_slices(table, BATCH)? {
        let slice = slice?;
        for r in 0..slice.len() {
            f(&slice, r)?;
        }
    }
    Ok(())
}

/// Checks that labels have a fixed-length numeric form.
pub fn check_labels(handle: &DatasetHandle) -> Result<()> {
    for b in &handle.layout().labels {
        if !b.sub.value_class.is_numeric() || !b.sub.dimension.is_fixed() {
            return Err(Error::UnsupportedTask(format!(
                "label `{}` is {} with dimension {}; the baseline needs fixed-length numeric labels",
                b.sub.name,
                if b.sub.value_class.is_numeric() { "numeric" } else { "tokenized" },
                b.sub.dimension
            )));
        }
    }
    Ok(())
}

impl FeaturePlan {
    /// Chooses a reduction per feature sub-feature and fits vocabularies on
    /// the train table.
    pub fn fit(handle: &DatasetHandle, featurizer: Featurizer) -> Result<FeaturePlan> {
        let unsupported = |b: &BoundSubFeature, what: &str| {
            Error::UnsupportedFeature(format!(
                "`{}` is {what}, which the {} featurizer cannot reduce",
                b.sub.name,
                featurizer.id()
            ))
        };
        let mut parts = Vec::new();
        for b in &handle.layout().features {
            let tokens = b.sub.value_class == ValueClass::Tokens;
            let part = match (&b.binding, tokens, b.sub.dimension.is_fixed(), featurizer) {
                (Binding::Inline { columns }, false, _, _) => Part::Inline {
                    columns: columns.clone(),
                },
                (Binding::Mapped { .. }, false, true, _) => Part::Block {
                    name: b.sub.name.clone(),
                },
                (Binding::Mapped { .. }, true, _, Featurizer::BagOfWords) => Part::Words {
                    name: b.sub.name.clone(),
                    vocab: Vocabulary::default(),
                },
                (Binding::Mapped { .. }, false, false, Featurizer::MoleculeAggregate { atom_width }) => {
                    if atom_width == 0 {
                        return Err(Error::Config("atom width must be at least 1".into()));
                    }
                    Part::Molecule {
                        name: b.sub.name.clone(),
                        width: atom_width,
                        elements: Vec::new(),
                    }
                }
                (_, true, _, _) => return Err(unsupported(b, "tokenized text")),
                _ => return Err(unsupported(b, "variable-length")),
            };
            parts.push(part);
        }

        if parts.iter().any(|p| matches!(p, Part::Words { .. } | Part::Molecule { .. })) {
            let mut words: Vec<BTreeSet<String>> = vec![BTreeSet::new(); parts.len()];
            let mut elements: Vec<BTreeSet<u64>> = vec![BTreeSet::new(); parts.len()];
            for_each_row(handle, TableName::Train, |slice, r| {
                for (i, p) in parts.iter().enumerate() {
                    match p {
                        Part::Words { name, .. } => {
                            let toks = block(handle, slice, r, name)?
                                .as_tokens()
                                .ok_or_else(|| Error::UnsupportedFeature(name.clone()))?;
                            words[i].extend(toks.iter().map(|t| t.text().to_string()));
                        }
                        Part::Molecule { name, width, .. } => {
                            let atoms = block(handle, slice, r, name)?
                                .as_numeric()
                                .ok_or_else(|| Error::UnsupportedFeature(name.clone()))?;
                            elements[i].extend(atoms.chunks(*width).map(|a| a[0].to_bits()));
                        }
                        _ => {}
                    }
                }
                Ok(())
            })?;
            for (i, p) in parts.iter_mut().enumerate() {
                match p {
                    Part::Words { name, vocab } => {
                        *vocab = Vocabulary::build(words[i].iter().map(String::as_str));
                        if vocab.is_empty() {
                            return Err(Error::Config(format!("`{name}` has no tokens in the train table")));
                        }
                    }
                    Part::Molecule { elements: e, .. } => {
                        let mut v: Vec<f64> = elements[i].iter().map(|b| f64::from_bits(*b)).collect();
                        v.sort_by(f64::total_cmp);
                        *e = v;
                    }
                    _ => {}
                }
            }
        }

        let features = &handle.layout().features;
        let width = parts
            .iter()
            .zip(features)
            .map(|(p, b)| match p {
                Part::Inline { columns } => columns.len(),
                Part::Block { .. } => b.sub.dimension.max(),
                Part::Words { vocab, .. } => vocab.len(),
                Part::Molecule { width, elements, .. } => elements.len() + 2 * (width - 1),
            })
            .sum();
        if width == 0 {
            return Err(Error::EmptyInput("featurization has no columns".into()));
        }
        Ok(FeaturePlan {
            featurizer,
            parts,
            width,
        })
    }

    fn row(&self, handle: &DatasetHandle, slice: &DataFrameSlice, r: usize, out: &mut Vec<f64>) -> Result<()> {
        for p in &self.parts {
            match p {
                Part::Inline { columns } => {
                    for &c in columns {
                        match slice.column_at(c) {
                            ColumnData::Numeric(v) => out.push(v[r]),
                            _ => unreachable!("inline columns are numeric"),
                        }
                    }
                }
                Part::Block { name } => {
                    let v = block(handle, slice, r, name)?
                        .as_numeric()
                        .ok_or_else(|| Error::UnsupportedFeature(name.clone()))?;
                    out.extend_from_slice(v);
                }
                Part::Words { name, vocab } => {
                    let toks = block(handle, slice, r, name)?
                        .as_tokens()
                        .ok_or_else(|| Error::UnsupportedFeature(name.clone()))?;
                    out.extend(bag_of_words(toks.iter().map(|t| t.text()), vocab)?);
                }
                Part::Molecule { name, width, elements } => {
                    let atoms = block(handle, slice, r, name)?
                        .as_numeric()
                        .ok_or_else(|| Error::UnsupportedFeature(name.clone()))?;
                    out.extend(molecule_aggregate(atoms, *width, elements)?);
                }
            }
        }
        Ok(())
    }

    /// Feature and label matrices of one table.
    pub fn apply(&self, handle: &DatasetHandle, table: TableName) -> Result<Featurized> {
        check_labels(handle)?;
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut rows = 0usize;
        for slice in handle.stream_slices(table, BATCH)? {
            let slice = slice?;
            let labels = handle.decode_group(&slice, Group::Labels)?;
            for r in 0..slice.len() {
                let start = x.len();
                self.row(handle, &slice, r, &mut x)?;
                if x.len() - start != self.width {
                    return Err(Error::Shape {
                        sub_feature: "features".into(),
                        message: format!("row {} featurizes to {} values, expected {}", rows, x.len() - start, self.width),
                    });
                }
                y.extend(labels.iter().map(|c| c[r]));
                rows += 1;
            }
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue {
                column: "features".into(),
                message: format!("non-finite value {bad}"),
            });
        }
        let dy = handle.layout().label_width();
        Ok(Featurized {
            x: Matrix::new(rows, self.width, x)?,
            y: Matrix::new(rows, dy, y)?,
            featurizer: self.featurizer.id(),
        })
    }
}
