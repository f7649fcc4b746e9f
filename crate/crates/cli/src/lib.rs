//! Library half of the `cayvol` front end: configuration parsing, file
//! formats, run manifests, and the command pipelines.  The binary in
//! `main.rs` is a thin dispatcher over [`pipeline`].

pub mod config;
pub mod format;
pub mod io;
pub mod manifest;
pub mod pipeline;

use thiserror::Error;

/// Top-level failure classes, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, unusable flags, or missing inputs — exit 2.
    #[error("{0}")]
    Config(String),
    /// A domain computation refused the instance — exit 3.
    #[error("{0}")]
    Domain(String),
    /// A scan was projected to exceed its budget cap — exit 4.
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
