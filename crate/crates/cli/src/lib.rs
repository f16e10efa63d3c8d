//! Config ingestion, orchestration and serialization for the `adia` binary.

pub mod app;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;

pub use error::{CliError, Result};
