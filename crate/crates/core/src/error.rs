use std::path::PathBuf;

use thiserror::Error;

use crate::fields::{ScalarField, VectorField};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Last state that passed validation before a solver gave up.
#[derive(Debug, Clone)]
pub struct AbortSnapshot {
    pub step: usize,
    pub t: f64,
    pub rho: ScalarField,
    pub mom: Option<VectorField>,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("run aborted at step {} (t = {}): {reason}", .snapshot.step, .snapshot.t)]
    Aborted {
        reason: String,
        snapshot: Box<AbortSnapshot>,
    },

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config validation failed: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("malformed snapshot: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A single failed configuration rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
