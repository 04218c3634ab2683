use std::path::PathBuf;

use casimir_lab::fieldexpr::ExprError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{flag}: {err}\n  {source_text}\n  {caret}")]
    Parse {
        flag: String,
        source_text: String,
        caret: String,
        err: ExprError,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn parse(flag: &str, src: &str, err: ExprError) -> Self {
        let caret = match err.offset() {
            Some(off) => format!("{}^", " ".repeat(src.get(..off).map_or(off, |s| s.chars().count()))),
            None => String::new(),
        };
        CliError::Parse {
            flag: flag.to_string(),
            source_text: src.to_string(),
            caret,
            err,
        }
    }

    pub fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        CliError::Io { path: path.into(), err }
    }

    pub fn numerical(err: impl std::fmt::Display) -> Self {
        CliError::Numerical(err.to_string())
    }

    /// 2 for bad input, 1 for failures during computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {err}")]
    Missing { path: PathBuf, err: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("unknown keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("field `{field}`: {message}")]
    Schema { field: String, message: String },
}
