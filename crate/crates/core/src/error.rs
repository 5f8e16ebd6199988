//! Error types shared across the crate.

use serde::Serialize;
use thiserror::Error;

/// What kind of data problem a [`Issue`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    /// A row or field that does not conform to the file schema.
    Schema,
    /// A key that references an entity not present in the corpus.
    DanglingReference,
    /// A key that appears more than once where uniqueness is required.
    DuplicateKey,
    /// Byline positions that do not form the contiguous set `1..=s`.
    BylineGap,
    /// Any other violated invariant (e.g. inverted activity interval).
    Invariant,
}

/// One validation finding, with enough context to locate the offending row.
#[derive(Debug, Clone, Serialize)]
pub struct Issue {
    pub kind: IssueKind,
    /// Source file (or logical table name when constructed in memory).
    pub file: String,
    /// 1-based record number within the file, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<u64>,
    /// Column / field name, when the issue is tied to one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    /// The offending key (e.g. the unresolved id), when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    pub message: String,
}

impl Issue {
    pub fn new(kind: IssueKind, file: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            kind,
            file: file.into(),
            row: None,
            column: None,
            key: None,
            message: message.into(),
        }
    }

    pub fn at_row(mut self, row: u64) -> Self {
        self.row = Some(row);
        self
    }

    pub fn in_column(mut self, column: impl Into<String>) -> Self {
        self.column = Some(column.into());
        self
    }

    pub fn with_key(mut self, key: impl Into<String>) -> Self {
        self.key = Some(key.into());
        self
    }
}

impl std::fmt::Display for Issue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} in {}", self.kind, self.file)?;
        if let Some(row) = self.row {
            write!(f, " (row {row})")?;
        }
        if let Some(col) = &self.column {
            write!(f, " [{col}]")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Errors raised while loading or constructing a corpus.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("validation failed with {} issue(s); first: {}", .0.len(), .0.first().map(|i| i.to_string()).unwrap_or_default())]
    Validation(Vec<Issue>),
}

impl DataError {
    /// All issues carried by this error (empty for plain i/o failures).
    pub fn issues(&self) -> &[Issue] {
        match self {
            DataError::Validation(issues) => issues,
            DataError::Io { .. } => &[],
        }
    }
}

/// Errors raised by ranking and the sensitivity analyses.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("empty population for {0}")]
    EmptyPopulation(String),
    #[error("population mismatch: {0}")]
    PopulationMismatch(String),
    #[error("window of {full_len} year(s) is not divisible into sub-windows of {part} year(s)")]
    NonDivisibleLength { full_len: usize, part: usize },
    #[error("invalid window: start {start} is after end {end}")]
    InvalidWindow { start: i32, end: i32 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

/// Errors raised by the synthetic corpus generator.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
}
