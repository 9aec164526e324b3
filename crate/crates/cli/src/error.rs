use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("report contains no records")]
    EmptyReport,
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed report {path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(
        "parse error at line {line}, column {column}{}: {message}",
        .field.as_deref().map(|f| format!(" (field `{f}`)")).unwrap_or_default()
    )]
    Parse { line: usize, column: usize, field: Option<String>, message: String },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("{context}: {source}")]
    Core { context: String, source: qndlab::Error },
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation { field: field.into(), message: message.into() }
    }

    pub fn core(context: impl Into<String>) -> impl FnOnce(qndlab::Error) -> Self {
        let context = context.into();
        move |source| CliError::Core { context, source }
    }

    /// Short machine-readable category used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "ParseError",
            CliError::Validation { .. } => "ValidationError",
            CliError::Core { .. } => "ComputationError",
            CliError::Io(_) => "IoError",
            CliError::ChecksFailed { .. } => "CheckFailed",
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
