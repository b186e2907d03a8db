use std::path::PathBuf;

use changescore_core::{
    AnalysisError, DagError, McError, ParseError, RoleError, ScenarioError, SemError,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Role(#[from] RoleError),
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Replication(#[from] McError),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for internal or numerical failures, 2 for bad user input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Replication(McError::TooManyFailures { .. }) | Error::Write { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
