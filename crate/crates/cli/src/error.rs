use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VALIDATION: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const DIVERGENCE: u8 = 3;
    pub const DOMAIN: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Core(#[from] optomech::Error),

    #[error("validation failed: {0} check(s) did not pass")]
    Validation(usize),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        use optomech::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => exit::CONFIG,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Core(e) => match e {
                E::Divergence { .. } | E::Accuracy { .. } => exit::DIVERGENCE,
                E::Domain { .. } => exit::DOMAIN,
                _ => exit::CONFIG,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
