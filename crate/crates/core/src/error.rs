//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported degree: {0}")]
    UnsupportedDegree(usize),

    #[error("unsupported quadrature order: {0} (supported 1..=8)")]
    UnsupportedQuadrature(usize),

    #[error("index out of range: {what} = {index} (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("positivity violation in cell {cell}: {what} = {value}")]
    Positivity {
        cell: usize,
        what: &'static str,
        value: f64,
    },

    #[error("unknown initial condition `{0}`; registered: {1}")]
    UnknownIc(String, String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("schema mismatch: expected {expected}, got {got}")]
    SchemaMismatch { expected: String, got: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid patch: {0}")]
    InvalidPatch(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
