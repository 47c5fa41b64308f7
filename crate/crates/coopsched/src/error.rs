use std::path::PathBuf;

use crate::config::ConfigError;
use crate::utias::DatasetError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] coopsched_core::Error),
    #[error("run {index} (seed {seed}) failed: {source}")]
    RunFailed {
        index: usize,
        seed: u64,
        #[source]
        source: coopsched_core::Error,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}
