use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}: `{key}`")]
    Parse { line: usize, key: String, reason: String },

    #[error("`{key}`: {reason}")]
    Validation { key: String, reason: String },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{experiment} experiment, {stage}: {source}")]
    Run {
        experiment: &'static str,
        stage: String,
        #[source]
        source: presym_core::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Attaches experiment and stage to core errors.
pub(crate) trait Context<T> {
    fn at(self, experiment: &'static str, stage: impl Into<String>) -> Result<T, HarnessError>;
}

impl<T> Context<T> for presym_core::Result<T> {
    fn at(self, experiment: &'static str, stage: impl Into<String>) -> Result<T, HarnessError> {
        self.map_err(|source| HarnessError::Run { experiment, stage: stage.into(), source })
    }
}
