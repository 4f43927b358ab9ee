use std::path::PathBuf;

use thiserror::Error;

use crate::data_model::schema::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("schema mismatch in {table}{}: {message}", row_suffix(.row))]
    SchemaMismatch {
        table: String,
        row: Option<u64>,
        message: String,
    },

    #[error("invalid schema: {}", join_violations(.0))]
    InvalidSchema(Vec<Violation>),

    #[error("shape error in sub-feature `{sub_feature}`: {message}")]
    Shape { sub_feature: String, message: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid value in {column}: {message}")]
    InvalidValue { column: String, message: String },

    #[error("incompatible histograms: {0}")]
    IncompatibleHistogram(String),

    #[error("unsupported feature `{0}`: only numeric sub-features can be scored, featurize it first")]
    UnsupportedFeature(String),

    #[error("undefined score: {0}")]
    UndefinedScore(String),

    #[error("dangling reference: identifier `{id}` not found in side store `{store}`")]
    DanglingReference { store: String, id: String },

    #[error("leakage: ood coordinates found in train split: {}", .0.join(", "))]
    Leakage(Vec<String>),

    #[error("empty coordinate domain `{0}` with nonzero sampling fraction")]
    EmptyDomain(String),

    #[error("undefined variance: labels have zero total variance, R2 is undefined")]
    UndefinedVariance,

    #[error("unsupported task: {0}")]
    UnsupportedTask(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn row_suffix(row: &Option<u64>) -> String {
    match row {
        Some(r) => format!(" (data row {r})"),
        None => String::new(),
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
