use std::path::PathBuf;

use thiserror::Error;

use crate::optimize::OptimizeError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("row {row}: class value is missing")]
    MissingClass { row: usize },

    #[error("column `{0}` has no observed values")]
    EmptyColumn(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Optimize(#[from] OptimizeError),
}

impl Error {
    /// Configuration errors map to exit code 2, everything else to 1.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_config() {
            2
        } else {
            1
        }
    }
}
