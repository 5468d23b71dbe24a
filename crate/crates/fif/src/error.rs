use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const CONFIG: u8 = 2;
    pub const DATA: u8 = 3;
    pub const INTERNAL: u8 = 4;
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: file is empty")]
    EmptyInput { path: PathBuf },
    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: row {row} has {found} values, expected {expected}")]
    Ragged {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] fif_core::Error),
    #[error("{0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn exit_code(&self) -> u8 {
        use fif_core::Error as C;
        match self {
            Error::Config(_) | Error::EmptyInput { .. } => exit::CONFIG,
            Error::Core(C::InvalidConfig(_) | C::InfiniteDictionary) => exit::CONFIG,
            Error::Parse { .. }
            | Error::Ragged { .. }
            | Error::Format { .. }
            | Error::Read { .. }
            | Error::Core(_) => exit::DATA,
            Error::Write { .. } | Error::Internal(_) => exit::INTERNAL,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
