use std::path::PathBuf;

use thiserror::Error;

use crate::scene::SupportViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{}: i/o error: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: parse error: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("{}: format version mismatch (found {found:?}, expected {expected})", path.display())]
    FormatVersion {
        path: PathBuf,
        found: Option<u64>,
        expected: u32,
    },

    #[error("{}: scene {scene} failed validation: {}", path.display(), join_violations(.violations))]
    Validation {
        path: PathBuf,
        scene: String,
        violations: Vec<SupportViolation>,
    },

    #[error("{}: object {object} references unknown model {model_id}", path.display())]
    UnknownModel {
        path: PathBuf,
        object: String,
        model_id: String,
    },

    #[error("{}: corrupt file: {message}", path.display())]
    Corrupt { path: PathBuf, message: String },

    #[error("observation set is empty")]
    EmptyObservations,

    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSpec(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

fn join_violations(violations: &[SupportViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
