use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("pulse at t={time} lies outside [0, {duration}]")]
    PulseOutOfRange { time: f64, duration: f64 },

    #[error("pulses at t={time} repeat the {axis} axis and cannot be merged")]
    DuplicatePulse { time: f64, axis: char },

    #[error("bath composition has no lines")]
    EmptyComposition,

    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
