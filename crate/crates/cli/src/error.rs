use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Numeric {
        context: String,
        source: iondecay_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl AppError {
    pub fn numeric(context: impl Into<String>, source: iondecay_core::Error) -> Self {
        AppError::Numeric {
            context: context.into(),
            source,
        }
    }

    /// 2 for bad input, 3 for numerical failure, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        use iondecay_core::Error as E;
        match self {
            AppError::Config(_) => 2,
            AppError::Numeric { source, .. } => match source {
                E::InvalidParameter { .. } | E::Domain { .. } | E::TruncationTooSmall { .. } => 2,
                _ => 3,
            },
            AppError::Io { .. } => 4,
        }
    }
}
