use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Malformed command line.
    Usage,
    /// Unreadable or malformed config file, or an unknown key.
    Config,
    /// A value that is well-formed but not allowed.
    Validation,
    /// A numeric value outside its declared range.
    Range,
    Io,
    /// An error raised by the computation itself.
    Module,
    /// The consistency suite ran but a check failed.
    Check,
}

/// The machine-readable error record written to stderr.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            kind,
            key: key.map(str::to_string),
            message: message.into(),
        }
    }

    pub fn validation(key: &str, message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Validation, Some(key), message)
    }

    pub fn range(key: &str, value: f64, range: &str) -> Self {
        Self::new(
            ErrorKind::Range,
            Some(key),
            format!("{key} = {value} is outside {range}"),
        )
    }

    pub fn module(context: &str, err: impl std::fmt::Display) -> Self {
        Self::new(ErrorKind::Module, None, format!("{context}: {err}"))
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::new(ErrorKind::Io, None, format!("{}: {err}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
