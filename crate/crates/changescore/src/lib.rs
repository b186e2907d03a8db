//! File formats, parallel replication and the `changescore` command line.

pub mod cli;
pub mod error;
pub mod formats;
pub mod report;
pub mod runner;

pub use error::{Error, Result};
