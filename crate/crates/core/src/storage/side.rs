use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::storage::table::{format_number, parse_number};

/// Token of a tokenized text: `(start, end, text)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token(pub usize, pub usize, pub String);

impl Token {
    pub fn text(&self) -> &str {
        &self.2
    }
}

/// Value block stored under one identifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueBlock {
    Numeric(Vec<f64>),
    Tokens(Vec<Token>),
}

impl ValueBlock {
    pub fn len(&self) -> usize {
        match self {
            ValueBlock::Numeric(v) => v.len(),
            ValueBlock::Tokens(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match self {
            ValueBlock::Numeric(v) => Some(v),
            ValueBlock::Tokens(_) => None,
        }
    }

    pub fn as_tokens(&self) -> Option<&[Token]> {
        match self {
            ValueBlock::Tokens(t) => Some(t),
            ValueBlock::Numeric(v) if v.is_empty() => Some(&[]),
            ValueBlock::Numeric(_) => None,
        }
    }
}

/// Mapping target stored next to the main tables.
#[derive(Debug, Clone)]
pub struct SideStore {
    /// Mapping column this store resolves.
    pub column: String,
    pub path: PathBuf,
    pub regular: bool,
    blocks: HashMap<String, Arc<ValueBlock>>,
    block_len: Option<usize>,
}

impl SideStore {
    pub fn from_blocks(
        column: impl Into<String>,
        path: impl Into<PathBuf>,
        regular: bool,
        blocks: impl IntoIterator<Item = (String, ValueBlock)>,
    ) -> Result<Self> {
        let column = column.into();
        let mut map = HashMap::new();
        let mut block_len = None;
        for (id, block) in blocks {
            if regular {
                if block.as_numeric().is_none() {
                    return Err(Error::Config(format!("regular store `{column}` holds non-numeric block `{id}`")));
                }
                match block_len {
                    None => block_len = Some(block.len()),
                    Some(n) if n != block.len() => {
                        return Err(Error::Config(format!(
                            "regular store `{column}`: block `{id}` has length {}, expected {n}",
                            block.len()
                        )))
                    }
                    _ => {}
                }
            }
            if map.insert(id.clone(), Arc::new(block)).is_some() {
                return Err(Error::Config(format!("store `{column}`: duplicate identifier `{id}`")));
            }
        }
        Ok(SideStore {
            column,
            path: path.into(),
            regular,
            blocks: map,
            block_len,
        })
    }

    pub fn load(column: &str, path: &Path, regular: bool) -> Result<Self> {
        if !path.exists() {
            return Err(Error::NotFound(path.to_path_buf()));
        }
        let blocks = if regular {
            read_regular(path)?
        } else {
            read_irregular(path)?
        };
        Self::from_blocks(column, path, regular, blocks)
    }

    pub fn get(&self, id: &str) -> Result<&Arc<ValueBlock>> {
        self.blocks.get(id).ok_or_else(|| Error::DanglingReference {
            store: self.column.clone(),
            id: id.to_string(),
        })
    }

    pub fn contains(&self, id: &str) -> bool {
        self.blocks.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Uniform block length of a regular store.
    pub fn block_len(&self) -> Option<usize> {
        self.block_len
    }

    /// Blocks in identifier order.
    pub fn sorted(&self) -> BTreeMap<&str, &ValueBlock> {
        self.blocks.iter().map(|(k, v)| (k.as_str(), v.as_ref())).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        }
        if self.regular {
            write_regular(path, self.block_len.unwrap_or(0), self.sorted())
        } else {
            write_irregular(path, self.sorted())
        }
    }
}

fn read_regular(path: &Path) -> Result<Vec<(String, ValueBlock)>> {
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file));
    let origin = path.display().to_string();
    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut line = 1;
    loop {
        line += 1;
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(&origin, e)),
        }
        let id = record.get(0).unwrap_or_default().to_string();
        let values = record
            .iter()
            .enumerate()
            .skip(1)
            .map(|(col, cell)| parse_number(cell, &origin, line, col + 1))
            .collect::<Result<Vec<_>>>()?;
        out.push((id, ValueBlock::Numeric(values)));
    }
    Ok(out)
}

fn read_irregular(path: &Path) -> Result<Vec<(String, ValueBlock)>> {
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let map: BTreeMap<String, ValueBlock> = serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(map.into_iter().collect())
}

fn write_regular(path: &Path, width: usize, blocks: BTreeMap<&str, &ValueBlock>) -> Result<()> {
    let origin = path.display().to_string();
    let file = File::create(path).map_err(|e| Error::io(&origin, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec!["id".to_string()];
    header.extend((0..width).map(|i| format!("value_{i}")));
    w.write_record(&header).map_err(|e| csv_error(&origin, e))?;
    for (id, block) in blocks {
        let values = block.as_numeric().unwrap_or_default();
        let mut row = Vec::with_capacity(values.len() + 1);
        row.push(id.to_string());
        row.extend(values.iter().map(|v| format_number(*v)));
        w.write_record(&row).map_err(|e| csv_error(&origin, e))?;
    }
    w.flush().map_err(|e| Error::io(&origin, e))
}

fn write_irregular(path: &Path, blocks: BTreeMap<&str, &ValueBlock>) -> Result<()> {
    let origin = path.display().to_string();
    let file = File::create(path).map_err(|e| Error::io(&origin, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, &blocks)
        .map_err(|e| Error::io(&origin, std::io::Error::other(e)))?;
    w.flush().map_err(|e| Error::io(&origin, e))
}

pub(crate) fn csv_error(origin: &str, e: csv::Error) -> Error {
    let (line, column) = e
        .position()
        .map(|p| (p.line() as usize, 0))
        .unwrap_or((0, 0));
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(origin, io),
        other => Error::Parse {
            path: origin.to_string(),
            line,
            column,
            message: format!("{other:?}"),
        },
    }
}
