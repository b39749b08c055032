//! Orchestration layer of the `povmqm` command-line tool.

// `!(x > 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::path::{Path, PathBuf};

pub mod acceptance;
pub mod commands;
pub mod config;

/// Environment variable supplying the default output directory.
pub const OUT_ENV: &str = "POVMQM_OUT";

/// Exit codes reported by [`exit_code`].
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_CRITERIA: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) => write!(f, "validation error: {m}"),
            Self::Numerical(m) => write!(f, "numerical guard: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<povmqm::Error> for CliError {
    fn from(e: povmqm::Error) -> Self {
        match e {
            povmqm::Error::Io(m) => Self::Io(m),
            e if e.is_numerical_guard() => Self::Numerical(e.to_string()),
            e => Self::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Validation(_) => EXIT_VALIDATION,
        CliError::Numerical(_) => EXIT_NUMERICAL,
        CliError::Io(_) => EXIT_IO,
    }
}

/// Files produced by a command, kept in memory until the command succeeds.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn files(&self) -> &[(String, Vec<u8>)] {
        &self.files
    }

    /// Writes every file into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir)?;
        self.files
            .iter()
            .map(|(name, bytes)| {
                let path = dir.join(name);
                std::fs::write(&path, bytes)?;
                Ok(path)
            })
            .collect()
    }
}
