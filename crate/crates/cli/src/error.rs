use std::path::PathBuf;

use thiserror::Error;

/// Everything that makes a run exit with status 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("malformed scenario JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("unknown scenario `{0}` (not a file and not a bundled name)")]
    UnknownScenario(String),

    #[error(transparent)]
    Compute(#[from] eulerdeg::Error),
}
